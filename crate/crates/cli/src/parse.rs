//! Line-oriented input language for algebras, modules, morphisms, and
//! short exact sequences.
//!
//! A file declares one algebra (field, mode, quiver, relations) and then
//! any number of named objects over it. Declarations are strictly
//! ordered: the algebra section is frozen by the first object line, and
//! every name must be defined before it is referenced. All diagnostics
//! carry a 1-based line and column.

use std::collections::BTreeMap;
use std::sync::Arc;

use projres::algebra::{build_algebra, AlgebraMode, AlgebraSpec, AlgebraTable, Relation};
use projres::error::{Error, Result};
use projres::horseshoe::{make_ses, ShortExactSequence};
use projres::linalg::{Field, Mat, Scalar};
use projres::module::{projective, simple, Module, Morphism, ProjectiveShape};
use projres::quiver::{Path, Quiver};

/// A parsed file: the algebra plus every named object declared over it.
pub struct Workspace {
    pub spec: AlgebraSpec,
    pub table: Arc<AlgebraTable>,
    pub modules: BTreeMap<String, Module>,
    pub maps: BTreeMap<String, Morphism>,
    /// declared endpoints of each map, by module name
    pub map_ends: BTreeMap<String, (String, String)>,
    pub sequences: BTreeMap<String, ShortExactSequence>,
}

fn err(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, col, message: message.into() }
}

/// Whitespace-separated tokens with their 1-based starting columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let bytes = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        out.push((start + 1, &line[start..i]));
    }
    out
}

/// Exact scalar literal: an integer or a fraction `a/b`. Floats are
/// rejected by name so the diagnostic explains the exactness rule.
fn parse_scalar(field: Field, text: &str) -> std::result::Result<Scalar, String> {
    if text.contains('.') {
        return Err(format!(
            "floating point literals are not accepted; write `{text}` as an exact fraction"
        ));
    }
    let mut parts = text.splitn(2, '/');
    let num_text = parts.next().unwrap_or("");
    let num: i64 = num_text
        .parse()
        .map_err(|_| format!("not an exact integer or fraction: `{text}`"))?;
    match parts.next() {
        None => Ok(field.from_i64(num)),
        Some(den_text) => {
            let den: i64 = den_text
                .parse()
                .map_err(|_| format!("not an exact integer or fraction: `{text}`"))?;
            field
                .from_ratio(num, den)
                .map_err(|_| format!("zero denominator in `{text}`"))
        }
    }
}

/// Bracketed matrix literal `[[a,b],[c,d]]` starting at `base` (0-based
/// byte offset) in `line`. Whitespace is allowed anywhere between
/// tokens. Returns the rows; the caller checks the shape.
fn parse_matrix(
    field: Field,
    line_no: usize,
    line: &str,
    base: usize,
) -> Result<Vec<Vec<Scalar>>> {
    let bytes = line.as_bytes();
    let mut i = base;
    let skip_ws = |i: &mut usize| {
        while *i < bytes.len() && bytes[*i].is_ascii_whitespace() {
            *i += 1;
        }
    };
    let col = |i: usize| i + 1;

    skip_ws(&mut i);
    if i >= bytes.len() || bytes[i] != b'[' {
        return Err(err(line_no, col(i), "expected a matrix literal like [[1,0],[0,1]]"));
    }
    i += 1;
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    skip_ws(&mut i);
    if i < bytes.len() && bytes[i] == b']' {
        i += 1;
    } else {
        loop {
            skip_ws(&mut i);
            if i >= bytes.len() || bytes[i] != b'[' {
                return Err(err(line_no, col(i), "expected `[` opening a matrix row"));
            }
            i += 1;
            let mut row = Vec::new();
            loop {
                skip_ws(&mut i);
                let start = i;
                while i < bytes.len() && !b",]".contains(&bytes[i]) && !bytes[i].is_ascii_whitespace()
                {
                    i += 1;
                }
                if start == i {
                    return Err(err(line_no, col(i), "expected a matrix entry"));
                }
                let entry = parse_scalar(field, &line[start..i])
                    .map_err(|m| err(line_no, col(start), m))?;
                row.push(entry);
                skip_ws(&mut i);
                match bytes.get(i) {
                    Some(b',') => i += 1,
                    Some(b']') => {
                        i += 1;
                        break;
                    }
                    _ => return Err(err(line_no, col(i), "expected `,` or `]` in a matrix row")),
                }
            }
            rows.push(row);
            skip_ws(&mut i);
            match bytes.get(i) {
                Some(b',') => i += 1,
                Some(b']') => {
                    i += 1;
                    break;
                }
                _ => return Err(err(line_no, col(i), "expected `,` or `]` between matrix rows")),
            }
        }
    }
    skip_ws(&mut i);
    if i < bytes.len() {
        return Err(err(line_no, col(i), "unexpected text after the matrix literal"));
    }
    if let Some(first) = rows.first() {
        if rows.iter().any(|r| r.len() != first.len()) {
            return Err(err(line_no, col(base), "matrix rows have differing lengths"));
        }
    }
    Ok(rows)
}

struct SpaceLine {
    line: usize,
    vcol: usize,
    vertex: String,
    deg: usize,
    dim: usize,
}

struct ActLine {
    line: usize,
    acol: usize,
    arrow: String,
    deg: usize,
    mcol: usize,
    entries: Vec<Vec<Scalar>>,
}

struct ModuleBlock {
    line: usize,
    name: String,
    spaces: Vec<SpaceLine>,
    acts: Vec<ActLine>,
}

struct BlockLine {
    line: usize,
    vcol: usize,
    vertex: String,
    deg: usize,
    mcol: usize,
    entries: Vec<Vec<Scalar>>,
}

struct MapBlock {
    line: usize,
    name: String,
    from: String,
    from_col: usize,
    to: String,
    to_col: usize,
    blocks: Vec<BlockLine>,
}

enum OpenBlock {
    None,
    Module(ModuleBlock),
    Map(MapBlock),
}

struct Parser {
    field: Option<(usize, Field)>,
    mode: Option<(usize, AlgebraMode)>,
    vertices: Vec<String>,
    arrows: Vec<(String, String, String)>,
    /// raw relation lines, resolved once the quiver is complete
    relations: Vec<(usize, String)>,
    frozen: Option<(AlgebraSpec, Arc<AlgebraTable>)>,
    open: OpenBlock,
    modules: BTreeMap<String, Module>,
    maps: BTreeMap<String, Morphism>,
    map_ends: BTreeMap<String, (String, String)>,
    sequences: BTreeMap<String, ShortExactSequence>,
}

fn expect_usize(line: usize, col: usize, text: &str, what: &str) -> Result<usize> {
    text.parse()
        .map_err(|_| err(line, col, format!("expected {what}, found `{text}`")))
}

impl Parser {
    fn new() -> Parser {
        Parser {
            field: None,
            mode: None,
            vertices: Vec::new(),
            arrows: Vec::new(),
            relations: Vec::new(),
            frozen: None,
            open: OpenBlock::None,
            modules: BTreeMap::new(),
            maps: BTreeMap::new(),
            map_ends: BTreeMap::new(),
            sequences: BTreeMap::new(),
        }
    }

    fn field(&self) -> Field {
        self.field.map(|(_, f)| f).unwrap_or(Field::Rationals)
    }

    fn algebra_line(&mut self, n: usize, toks: &[(usize, &str)]) -> Result<()> {
        if self.frozen.is_some() {
            return Err(err(n, toks[0].0, "the algebra section is closed once objects begin"));
        }
        if self.mode.is_some() {
            return Err(err(n, toks[0].0, "the algebra is already declared"));
        }
        let (kcol, kind) = *toks
            .get(1)
            .ok_or_else(|| err(n, toks[0].0, "expected `graded D=<wall>` or `findim N=<wall>`"))?;
        let (bcol, bound_tok) = *toks
            .get(2)
            .ok_or_else(|| err(n, kcol, "expected a bound like `D=6` or `N=2`"))?;
        if toks.len() > 3 {
            return Err(err(n, toks[3].0, "unexpected text after the algebra declaration"));
        }
        let (key, value) = bound_tok
            .split_once('=')
            .ok_or_else(|| err(n, bcol, format!("expected `<key>=<wall>`, found `{bound_tok}`")))?;
        let wall = expect_usize(n, bcol, value, "a degree bound")?;
        let mode = match (kind, key) {
            ("graded", "D") => AlgebraMode::Graded { degree_bound: wall },
            ("findim", "N") => AlgebraMode::FinDim { nilpotency_bound: wall },
            ("graded", _) => return Err(err(n, bcol, "graded algebras take `D=<wall>`")),
            ("findim", _) => return Err(err(n, bcol, "findim algebras take `N=<wall>`")),
            _ => {
                return Err(err(n, kcol, format!("unknown algebra mode `{kind}`; expected graded or findim")))
            }
        };
        self.mode = Some((n, mode));
        Ok(())
    }

    fn field_line(&mut self, n: usize, toks: &[(usize, &str)]) -> Result<()> {
        if self.frozen.is_some() || self.mode.is_some() {
            return Err(err(n, toks[0].0, "the field must be declared before the algebra"));
        }
        if self.field.is_some() {
            return Err(err(n, toks[0].0, "the field is already declared"));
        }
        let (col, name) = *toks
            .get(1)
            .ok_or_else(|| err(n, toks[0].0, "expected `Q` or `F<p>`"))?;
        let f = if name == "Q" {
            Field::Rationals
        } else if let Some(p_text) = name.strip_prefix('F') {
            let p: u64 = p_text
                .parse()
                .map_err(|_| err(n, col, format!("expected a prime after F, found `{p_text}`")))?;
            if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p % d == 0) {
                return Err(err(n, col, format!("{p} is not prime")));
            }
            Field::Prime(p)
        } else {
            return Err(err(n, col, format!("unknown field `{name}`; expected Q or F<p>")));
        };
        self.field = Some((n, f));
        Ok(())
    }

    fn vertex_line(&mut self, n: usize, toks: &[(usize, &str)]) -> Result<()> {
        if self.frozen.is_some() {
            return Err(err(n, toks[0].0, "vertex declarations must precede objects"));
        }
        let (col, name) = *toks.get(1).ok_or_else(|| err(n, toks[0].0, "expected a vertex name"))?;
        if self.vertices.iter().any(|v| v == name) {
            return Err(err(n, col, format!("vertex `{name}` is already declared")));
        }
        self.vertices.push(name.to_string());
        Ok(())
    }

    fn arrow_line(&mut self, n: usize, toks: &[(usize, &str)]) -> Result<()> {
        if self.frozen.is_some() {
            return Err(err(n, toks[0].0, "arrow declarations must precede objects"));
        }
        let (ncol, raw_name) = *toks.get(1).ok_or_else(|| err(n, toks[0].0, "expected an arrow name"))?;
        let (name, rest) = match raw_name.strip_suffix(':') {
            Some(stripped) if !stripped.is_empty() => (stripped, &toks[2..]),
            _ => {
                if toks.get(2).map(|&(_, t)| t) == Some(":") {
                    (raw_name, &toks[3..])
                } else {
                    return Err(err(n, ncol, "expected `arrow <name>: <source> -> <target>`"));
                }
            }
        };
        let &[(scol, src), (acol, arr), (tcol, tgt)] = rest else {
            return Err(err(n, ncol, "expected `arrow <name>: <source> -> <target>`"));
        };
        if arr != "->" {
            return Err(err(n, acol, format!("expected `->`, found `{arr}`")));
        }
        for (col, v) in [(scol, src), (tcol, tgt)] {
            if !self.vertices.iter().any(|w| w == v) {
                return Err(err(n, col, format!("unknown vertex `{v}`")));
            }
        }
        if self.arrows.iter().any(|(a, _, _)| a == name) || self.vertices.iter().any(|v| v == name) {
            return Err(err(n, ncol, format!("name `{name}` is already declared")));
        }
        self.arrows.push((name.to_string(), src.to_string(), tgt.to_string()));
        Ok(())
    }

    fn freeze(&mut self, at_line: usize) -> Result<()> {
        if self.frozen.is_some() {
            return Ok(());
        }
        let Some((mode_line, mode)) = self.mode.clone() else {
            return Err(err(at_line, 1, "no algebra block"));
        };
        let field = self.field();
        let q = Quiver::new(self.vertices.clone(), self.arrows.clone())
            .map_err(|e| err(mode_line, 1, e.to_string()))?;
        let mut relations = Vec::with_capacity(self.relations.len());
        for (line_no, raw) in std::mem::take(&mut self.relations) {
            relations.push(resolve_relation(field, &q, line_no, &raw)?);
        }
        let spec = AlgebraSpec::new(q, relations, mode, field)
            .map_err(|e| err(mode_line, 1, e.to_string()))?;
        let table = build_algebra(spec.clone()).map_err(|e| err(mode_line, 1, e.to_string()))?;
        self.frozen = Some((spec, Arc::new(table)));
        Ok(())
    }

    fn table(&self) -> &Arc<AlgebraTable> {
        &self.frozen.as_ref().expect("objects parse after freezing").1
    }

    /// (layer count, action layer count, graded wall) for module bodies
    fn windows(&self) -> (usize, usize, usize) {
        let t = self.table();
        match t.degree_bound() {
            Some(wall) => (wall + 1, wall, wall),
            None => (1, 1, 0),
        }
    }

    fn vertex_index(&self, line: usize, col: usize, name: &str) -> Result<usize> {
        self.table()
            .quiver()
            .vertex_index(name)
            .ok_or_else(|| err(line, col, format!("unknown vertex `{name}`")))
    }

    fn close_block(&mut self) -> Result<()> {
        match std::mem::replace(&mut self.open, OpenBlock::None) {
            OpenBlock::None => Ok(()),
            OpenBlock::Module(b) => self.finish_module(b),
            OpenBlock::Map(b) => self.finish_map(b),
        }
    }

    fn check_fresh_module(&self, line: usize, col: usize, name: &str) -> Result<()> {
        if self.modules.contains_key(name) {
            return Err(err(line, col, format!("module `{name}` is already defined")));
        }
        Ok(())
    }

    fn finish_module(&mut self, b: ModuleBlock) -> Result<()> {
        let (layers, act_layers, wall) = self.windows();
        let t = self.table().clone();
        let q = t.quiver();
        let n_v = q.vertex_count();
        let graded = t.is_graded();
        let field = t.field();

        let mut dims = vec![vec![0usize; n_v]; layers];
        for s in &b.spaces {
            let v = self.vertex_index(s.line, s.vcol, &s.vertex)?;
            if graded && s.deg > wall {
                return Err(err(s.line, s.vcol, format!("degree {} exceeds the wall D={wall}", s.deg)));
            }
            if !graded && s.deg != 0 {
                return Err(err(s.line, s.vcol, "finite-dimensional modules carry a single layer at degree 0"));
            }
            if dims[s.deg][v] != 0 {
                return Err(err(s.line, s.vcol, format!("slot (degree {}, {}) is already declared", s.deg, s.vertex)));
            }
            dims[s.deg][v] = s.dim;
        }

        let mut action: Vec<Vec<Mat>> = (0..act_layers)
            .map(|d| {
                let to = if graded { d + 1 } else { 0 };
                q.arrows()
                    .iter()
                    .map(|a| Mat::zero(field, dims[d][a.source], dims[to][a.target]))
                    .collect()
            })
            .collect();
        for act in &b.acts {
            let a = q
                .arrow_index(&act.arrow)
                .ok_or_else(|| err(act.line, act.acol, format!("unknown arrow `{}`", act.arrow)))?;
            if act.deg >= act_layers {
                return Err(err(
                    act.line,
                    act.acol,
                    format!("action degree {} is out of range (layers 0..{act_layers})", act.deg),
                ));
            }
            let target = &action[act.deg][a];
            let (rows, cols) = (target.rows(), target.cols());
            let got_rows = act.entries.len();
            let got_cols = act.entries.first().map_or(0, Vec::len);
            if got_rows != rows || got_cols != cols {
                return Err(err(
                    act.line,
                    act.mcol,
                    format!("matrix is {got_rows}x{got_cols}, slot needs {rows}x{cols}"),
                ));
            }
            action[act.deg][a] =
                Mat::from_fn(field, rows, cols, |r, c| act.entries[r][c].clone());
        }

        let m = Module::new(t, dims, action)
            .map_err(|e| err(b.line, 1, format!("module `{}` rejected: {e}", b.name)))?;
        self.modules.insert(b.name, m);
        Ok(())
    }

    fn finish_map(&mut self, b: MapBlock) -> Result<()> {
        let dom = self
            .modules
            .get(&b.from)
            .ok_or_else(|| err(b.line, b.from_col, format!("unknown module `{}`", b.from)))?
            .clone();
        let cod = self
            .modules
            .get(&b.to)
            .ok_or_else(|| err(b.line, b.to_col, format!("unknown module `{}`", b.to)))?
            .clone();
        let field = dom.field();
        let (wall, graded) = (self.windows().2, self.table().is_graded());

        let mut blocks: Vec<Vec<Mat>> = dom
            .dims()
            .iter()
            .enumerate()
            .map(|(d, layer)| {
                (0..layer.len())
                    .map(|v| Mat::zero(field, layer[v], cod.dim(d, v)))
                    .collect()
            })
            .collect();
        for bl in &b.blocks {
            let v = self.vertex_index(bl.line, bl.vcol, &bl.vertex)?;
            if bl.deg >= blocks.len() {
                let limit = if graded {
                    format!("the wall D={wall}")
                } else {
                    "degree 0".to_string()
                };
                return Err(err(bl.line, bl.vcol, format!("degree {} exceeds {limit}", bl.deg)));
            }
            let target = &blocks[bl.deg][v];
            let (rows, cols) = (target.rows(), target.cols());
            let got_rows = bl.entries.len();
            let got_cols = bl.entries.first().map_or(0, Vec::len);
            if got_rows != rows || got_cols != cols {
                return Err(err(
                    bl.line,
                    bl.mcol,
                    format!("matrix is {got_rows}x{got_cols}, block needs {rows}x{cols}"),
                ));
            }
            blocks[bl.deg][v] = Mat::from_fn(field, rows, cols, |r, c| bl.entries[r][c].clone());
        }

        let f = Morphism::new(dom, cod, blocks)
            .map_err(|e| err(b.line, 1, format!("map `{}` rejected: {e}", b.name)))?;
        self.map_ends.insert(b.name.clone(), (b.from, b.to));
        self.maps.insert(b.name, f);
        Ok(())
    }

    fn module_line(&mut self, n: usize, toks: &[(usize, &str)]) -> Result<()> {
        self.close_block()?;
        self.freeze(n)?;
        let (ncol, name) = *toks.get(1).ok_or_else(|| err(n, toks[0].0, "expected a module name"))?;
        self.check_fresh_module(n, ncol, name)?;
        if self.maps.contains_key(name) || self.sequences.contains_key(name) {
            return Err(err(n, ncol, format!("name `{name}` is already used")));
        }
        if toks.get(2).map(|&(_, t)| t) == Some("=") {
            let m = self.shorthand_module(n, &toks[3..])?;
            self.modules.insert(name.to_string(), m);
            return Ok(());
        }
        if toks.len() > 2 {
            return Err(err(n, toks[2].0, "expected a bare `module <name>` block or `module <name> = ...`"));
        }
        self.open = OpenBlock::Module(ModuleBlock {
            line: n,
            name: name.to_string(),
            spaces: Vec::new(),
            acts: Vec::new(),
        });
        Ok(())
    }

    fn shorthand_module(&mut self, n: usize, rest: &[(usize, &str)]) -> Result<Module> {
        let t = self.table().clone();
        let graded = t.is_graded();
        let bound = self.windows().2;
        let (kcol, kind) = *rest
            .first()
            .ok_or_else(|| err(n, 1, "expected `proj <vertex> [shift <s>]` or `simple <vertex> [deg <d>]`"))?;
        match kind {
            "proj" => {
                let (vcol, vname) = *rest.get(1).ok_or_else(|| err(n, kcol, "expected a vertex name"))?;
                let v = self.vertex_index(n, vcol, vname)?;
                let shift = match rest.get(2) {
                    None => 0,
                    Some(&(scol, "shift")) => {
                        let (tcol, text) = *rest
                            .get(3)
                            .ok_or_else(|| err(n, scol, "expected a shift amount"))?;
                        expect_usize(n, tcol, text, "a shift amount")?
                    }
                    Some(&(scol, other)) => {
                        return Err(err(n, scol, format!("expected `shift <s>`, found `{other}`")))
                    }
                };
                if !graded && shift > 0 {
                    return Err(err(n, kcol, "finite-dimensional projectives take no shift"));
                }
                projective(&t, &ProjectiveShape::new(vec![(v, shift)]), bound)
                    .map_err(|e| err(n, kcol, e.to_string()))
            }
            "simple" => {
                let (vcol, vname) = *rest.get(1).ok_or_else(|| err(n, kcol, "expected a vertex name"))?;
                let v = self.vertex_index(n, vcol, vname)?;
                let deg = match rest.get(2) {
                    None => 0,
                    Some(&(scol, "deg")) => {
                        let (tcol, text) =
                            *rest.get(3).ok_or_else(|| err(n, scol, "expected a degree"))?;
                        expect_usize(n, tcol, text, "a degree")?
                    }
                    Some(&(scol, other)) => {
                        return Err(err(n, scol, format!("expected `deg <d>`, found `{other}`")))
                    }
                };
                if !graded && deg > 0 {
                    return Err(err(n, kcol, "finite-dimensional simples live in degree 0"));
                }
                simple(&t, v, deg, bound).map_err(|e| err(n, kcol, e.to_string()))
            }
            other => Err(err(n, kcol, format!("unknown shorthand `{other}`; expected proj or simple"))),
        }
    }

    fn space_line(&mut self, n: usize, toks: &[(usize, &str)]) -> Result<()> {
        let OpenBlock::Module(block) = &mut self.open else {
            return Err(err(n, toks[0].0, "`space` lines belong inside a module block"));
        };
        let &[_, (vcol, vertex), (dcol, deg_kw), (dvcol, deg), (kcol, dim_kw), (kvcol, dim)] = toks
        else {
            return Err(err(n, toks[0].0, "expected `space <vertex> deg <d> dim <k>`"));
        };
        if deg_kw != "deg" {
            return Err(err(n, dcol, format!("expected `deg`, found `{deg_kw}`")));
        }
        if dim_kw != "dim" {
            return Err(err(n, kcol, format!("expected `dim`, found `{dim_kw}`")));
        }
        block.spaces.push(SpaceLine {
            line: n,
            vcol,
            vertex: vertex.to_string(),
            deg: expect_usize(n, dvcol, deg, "a degree")?,
            dim: expect_usize(n, kvcol, dim, "a dimension")?,
        });
        Ok(())
    }

    fn act_line(&mut self, n: usize, line: &str, toks: &[(usize, &str)]) -> Result<()> {
        let field = self.field();
        let OpenBlock::Module(block) = &mut self.open else {
            return Err(err(n, toks[0].0, "`act` lines belong inside a module block"));
        };
        let &[_, (acol, arrow), (dcol, deg_kw), (dvcol, deg), (ecol, eq)] =
            &toks[..5.min(toks.len())]
        else {
            return Err(err(n, toks[0].0, "expected `act <arrow> deg <d> = [[..]]`"));
        };
        if deg_kw != "deg" {
            return Err(err(n, dcol, format!("expected `deg`, found `{deg_kw}`")));
        }
        if eq != "=" {
            return Err(err(n, ecol, format!("expected `=`, found `{eq}`")));
        }
        let entries = parse_matrix(field, n, line, ecol)?;
        block.acts.push(ActLine {
            line: n,
            acol,
            arrow: arrow.to_string(),
            deg: expect_usize(n, dvcol, deg, "a degree")?,
            mcol: ecol,
            entries,
        });
        Ok(())
    }

    fn map_line(&mut self, n: usize, toks: &[(usize, &str)]) -> Result<()> {
        self.close_block()?;
        self.freeze(n)?;
        let (ncol, raw_name) = *toks.get(1).ok_or_else(|| err(n, toks[0].0, "expected a map name"))?;
        let (name, rest) = match raw_name.strip_suffix(':') {
            Some(stripped) if !stripped.is_empty() => (stripped, &toks[2..]),
            _ => {
                if toks.get(2).map(|&(_, t)| t) == Some(":") {
                    (raw_name, &toks[3..])
                } else {
                    return Err(err(n, ncol, "expected `map <name>: <from> -> <to>`"));
                }
            }
        };
        if self.maps.contains_key(name) || self.modules.contains_key(name) || self.sequences.contains_key(name)
        {
            return Err(err(n, ncol, format!("name `{name}` is already used")));
        }
        let &[(fcol, from), (acol, arr), (tcol, to)] = rest else {
            return Err(err(n, ncol, "expected `map <name>: <from> -> <to>`"));
        };
        if arr != "->" {
            return Err(err(n, acol, format!("expected `->`, found `{arr}`")));
        }
        self.open = OpenBlock::Map(MapBlock {
            line: n,
            name: name.to_string(),
            from: from.to_string(),
            from_col: fcol,
            to: to.to_string(),
            to_col: tcol,
            blocks: Vec::new(),
        });
        Ok(())
    }

    fn block_line(&mut self, n: usize, line: &str, toks: &[(usize, &str)]) -> Result<()> {
        let field = self.field();
        let OpenBlock::Map(block) = &mut self.open else {
            return Err(err(n, toks[0].0, "`block` lines belong inside a map block"));
        };
        let &[_, (vcol, vertex), (dcol, deg_kw), (dvcol, deg), (ecol, eq)] =
            &toks[..5.min(toks.len())]
        else {
            return Err(err(n, toks[0].0, "expected `block <vertex> deg <d> = [[..]]`"));
        };
        if deg_kw != "deg" {
            return Err(err(n, dcol, format!("expected `deg`, found `{deg_kw}`")));
        }
        if eq != "=" {
            return Err(err(n, ecol, format!("expected `=`, found `{eq}`")));
        }
        let entries = parse_matrix(field, n, line, ecol)?;
        block.blocks.push(BlockLine {
            line: n,
            vcol,
            vertex: vertex.to_string(),
            deg: expect_usize(n, dvcol, deg, "a degree")?,
            mcol: ecol,
            entries,
        });
        Ok(())
    }

    fn ses_line(&mut self, n: usize, toks: &[(usize, &str)]) -> Result<()> {
        self.close_block()?;
        self.freeze(n)?;
        let (ncol, name) = *toks.get(1).ok_or_else(|| err(n, toks[0].0, "expected a sequence name"))?;
        if self.sequences.contains_key(name) || self.modules.contains_key(name) || self.maps.contains_key(name)
        {
            return Err(err(n, ncol, format!("name `{name}` is already used")));
        }
        let &[(eqcol, eq), (kcol, k_name), (icol, i_tok), (mcol, m_name), (pcol, p_tok), (ncol2, n_name)] =
            &toks[2..]
        else {
            return Err(err(n, ncol, "expected `ses <name> = <K> -<i>-> <M> -<p>-> <N>`"));
        };
        if eq != "=" {
            return Err(err(n, eqcol, format!("expected `=`, found `{eq}`")));
        }
        let map_name = |col: usize, tok: &str| -> Result<String> {
            tok.strip_prefix('-')
                .and_then(|t| t.strip_suffix("->"))
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .ok_or_else(|| err(n, col, format!("expected `-<map>->`, found `{tok}`")))
        };
        let i_name = map_name(icol, i_tok)?;
        let p_name = map_name(pcol, p_tok)?;
        let module = |col: usize, mn: &str| -> Result<Module> {
            self.modules
                .get(mn)
                .cloned()
                .ok_or_else(|| err(n, col, format!("unknown module `{mn}`")))
        };
        let (k, m, nn) = (module(kcol, k_name)?, module(mcol, m_name)?, module(ncol2, n_name)?);
        let lookup_map = |col: usize, mapn: &str, want: (&str, &str)| -> Result<Morphism> {
            let f = self
                .maps
                .get(mapn)
                .cloned()
                .ok_or_else(|| err(n, col, format!("unknown map `{mapn}`")))?;
            let ends = &self.map_ends[mapn];
            if ends.0 != want.0 || ends.1 != want.1 {
                return Err(err(
                    n,
                    col,
                    format!(
                        "map `{mapn}` connects {} -> {}, but the sequence needs {} -> {}",
                        ends.0, ends.1, want.0, want.1
                    ),
                ));
            }
            Ok(f)
        };
        let i = lookup_map(icol, &i_name, (k_name, m_name))?;
        let p = lookup_map(pcol, &p_name, (m_name, n_name))?;
        let s = make_ses(k, m, nn, i, p).map_err(|e| err(n, ncol, e.to_string()))?;
        self.sequences.insert(name.to_string(), s);
        Ok(())
    }
}

/// Resolve one `relation` line against the finished quiver.
fn resolve_relation(field: Field, q: &Quiver, n: usize, raw: &str) -> Result<Relation> {
    let toks = tokens(raw);
    if toks.len() < 2 {
        return Err(err(n, toks[0].0, "expected `relation <c>*<path> [+ <c>*<path> ...]`"));
    }
    let mut terms = Vec::new();
    let mut expect_term = true;
    for &(col, tok) in &toks[1..] {
        if expect_term {
            let (coeff_text, path_text) = tok
                .split_once('*')
                .ok_or_else(|| err(n, col, format!("expected `<coefficient>*<path>`, found `{tok}`")))?;
            let coeff =
                parse_scalar(field, coeff_text).map_err(|m| err(n, col, m))?;
            let mut arrows = Vec::new();
            let mut seg_col = col + coeff_text.len() + 1;
            for seg in path_text.split('.') {
                let a = q
                    .arrow_index(seg)
                    .ok_or_else(|| err(n, seg_col, format!("unknown arrow `{seg}`")))?;
                arrows.push(a);
                seg_col += seg.len() + 1;
            }
            let path = Path::from_arrows(q, arrows).map_err(|e| err(n, col, e.to_string()))?;
            terms.push((coeff, path));
            expect_term = false;
        } else if tok == "+" {
            expect_term = true;
        } else {
            return Err(err(n, col, format!("expected `+` between terms, found `{tok}`")));
        }
    }
    if expect_term {
        return Err(err(n, toks.last().unwrap().0, "a relation cannot end with `+`"));
    }
    Relation::new(terms).map_err(|e| err(n, toks[0].0, e.to_string()))
}

/// Parse a complete source file into a workspace.
pub fn parse(source: &str) -> Result<Workspace> {
    let mut p = Parser::new();
    let mut last_line = 0;
    for (idx, raw) in source.lines().enumerate() {
        let n = idx + 1;
        last_line = n;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let toks = tokens(line);
        let Some(&(_, head)) = toks.first() else { continue };
        match head {
            "field" => p.field_line(n, &toks)?,
            "algebra" => p.algebra_line(n, &toks)?,
            "vertex" => p.vertex_line(n, &toks)?,
            "arrow" => p.arrow_line(n, &toks)?,
            "relation" => {
                if p.frozen.is_some() {
                    return Err(err(n, toks[0].0, "relations must precede objects"));
                }
                p.relations.push((n, line.to_string()));
            }
            "module" => p.module_line(n, &toks)?,
            "space" => p.space_line(n, &toks)?,
            "act" => p.act_line(n, line, &toks)?,
            "map" => p.map_line(n, &toks)?,
            "block" => p.block_line(n, line, &toks)?,
            "ses" => p.ses_line(n, &toks)?,
            other => {
                return Err(err(
                    n,
                    toks[0].0,
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }
    p.close_block()?;
    p.freeze(last_line.max(1))?;
    let (spec, table) = p.frozen.expect("freeze either errors or fills the algebra");
    Ok(Workspace {
        spec,
        table,
        modules: p.modules,
        maps: p.maps,
        map_ends: p.map_ends,
        sequences: p.sequences,
    })
}
