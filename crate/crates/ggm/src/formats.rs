//! On-disk formats: edge lists, matrix CSV, and JSON sidecars.
//!
//! Edge list: a `p <count>` header line, then one `u v` line per edge with
//! `u < v`, sorted. Matrix CSV: a header with `p` for square matrices or
//! `rows,cols` otherwise, then comma-separated rows at 17 significant digits.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ggm_core::model::SignPattern;
use ggm_core::{GaussianModel, Graph, Matrix, SampleSet};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] ggm_core::Error),
}

pub type Result<T> = std::result::Result<T, FormatError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io { path: path.to_path_buf(), source }
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse { line, message: message.into() }
}

pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "p {}", g.node_count())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()
}

pub fn read_edge_list<R: BufRead>(r: R) -> Result<Graph> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty edge list"))?;
    let header = header.map_err(|e| parse_err(1, e.to_string()))?;
    let p = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["p", count] => count.parse::<usize>().map_err(|e| parse_err(1, format!("bad node count: {e}")))?,
        _ => return Err(parse_err(1, format!("expected 'p <count>', found '{header}'"))),
    };
    let mut edges = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| parse_err(idx + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace().map(str::parse::<usize>);
        match (parts.next(), parts.next(), parts.next()) {
            (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
            _ => return Err(parse_err(idx + 1, format!("expected 'u v', found '{line}'"))),
        }
    }
    Ok(Graph::from_edges(p, edges)?)
}

pub fn save_edge_list(path: &Path, g: &Graph) -> Result<()> {
    let f = fs::File::create(path).map_err(io_err(path))?;
    write_edge_list(g, BufWriter::new(f)).map_err(io_err(path))
}

pub fn load_edge_list(path: &Path) -> Result<Graph> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    read_edge_list(BufReader::new(f))
}

pub fn write_matrix<W: Write>(m: &Matrix, mut w: W) -> std::io::Result<()> {
    if m.is_square() {
        writeln!(w, "{}", m.rows())?;
    } else {
        writeln!(w, "{},{}", m.rows(), m.cols())?;
    }
    let mut line = String::new();
    for i in 0..m.rows() {
        line.clear();
        for (k, x) in m.row(i).iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!("{x:.16e}"));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()
}

pub fn read_matrix<R: BufRead>(r: R) -> Result<Matrix> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty matrix file"))?;
    let header = header.map_err(|e| parse_err(1, e.to_string()))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(1, format!("bad header '{header}': {e}")))?;
    let (rows, cols) = match dims.as_slice() {
        [p] => (*p, *p),
        [r, c] => (*r, *c),
        _ => return Err(parse_err(1, format!("header must be 'p' or 'rows,cols', found '{header}'"))),
    };
    let mut data = Vec::with_capacity(rows * cols);
    for (idx, line) in lines {
        let line = line.map_err(|e| parse_err(idx + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for t in line.split(',') {
            data.push(t.trim().parse::<f64>().map_err(|e| parse_err(idx + 1, format!("bad value '{t}': {e}")))?);
        }
        if data.len() - before != cols {
            return Err(parse_err(idx + 1, format!("expected {cols} values, found {}", data.len() - before)));
        }
    }
    if data.len() != rows * cols {
        return Err(parse_err(rows + 1, format!("expected {rows} rows, found {}", data.len() / cols.max(1))));
    }
    Ok(Matrix::from_row_major(rows, cols, data)?)
}

pub fn save_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let f = fs::File::create(path).map_err(io_err(path))?;
    write_matrix(m, BufWriter::new(f)).map_err(io_err(path))
}

pub fn load_matrix(path: &Path) -> Result<Matrix> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    read_matrix(BufReader::new(f))
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// How a model was synthesized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub target_alpha: f64,
    pub sign_pattern: SignPattern,
    pub diagonal: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self { target_alpha: 0.5, sign_pattern: SignPattern::Attractive, diagonal: 1.0 }
    }
}

/// Sidecar for a model stored as an edge list plus a precision CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub graph_file: String,
    pub precision_file: String,
    pub p: usize,
    pub edges: usize,
    pub alpha: f64,
    pub j_min: f64,
    pub j_max: f64,
    pub seed: Option<u64>,
    pub synthesis: Option<ModelSpec>,
    /// Hex fingerprint of the precision matrix.
    pub model_id: String,
}

/// Sidecar for a sample matrix CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub data_file: String,
    pub seed: u64,
    pub model_id: String,
    pub n: usize,
    pub p: usize,
}

fn sibling(meta_path: &Path, file: &str) -> PathBuf {
    meta_path.parent().unwrap_or(Path::new(".")).join(file)
}

/// Writes `<stem>.edges`, `<stem>.precision.csv` and `<stem>.json` into `dir`.
pub fn save_model(dir: &Path, stem: &str, m: &GaussianModel, seed: Option<u64>, synthesis: Option<ModelSpec>) -> Result<PathBuf> {
    let graph_file = format!("{stem}.edges");
    let precision_file = format!("{stem}.precision.csv");
    save_edge_list(&dir.join(&graph_file), m.graph())?;
    save_matrix(&dir.join(&precision_file), m.precision())?;
    let meta = ModelMeta {
        graph_file,
        precision_file,
        p: m.node_count(),
        edges: m.graph().edge_count(),
        alpha: m.alpha(),
        j_min: m.j_min(),
        j_max: m.j_max(),
        seed,
        synthesis,
        model_id: format!("{:016x}", m.fingerprint()),
    };
    let path = dir.join(format!("{stem}.json"));
    save_json(&path, &meta)?;
    Ok(path)
}

/// Loads a model through its JSON sidecar.
pub fn load_model(meta_path: &Path) -> Result<GaussianModel> {
    let meta: ModelMeta = load_json(meta_path)?;
    let g = load_edge_list(&sibling(meta_path, &meta.graph_file))?;
    let j = load_matrix(&sibling(meta_path, &meta.precision_file))?;
    Ok(GaussianModel::new(g, j)?)
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`.
pub fn save_samples(dir: &Path, stem: &str, s: &SampleSet) -> Result<PathBuf> {
    let data_file = format!("{stem}.csv");
    save_matrix(&dir.join(&data_file), s.data())?;
    let meta = SampleMeta { data_file, seed: s.seed(), model_id: format!("{:016x}", s.model_id()), n: s.n(), p: s.p() };
    let path = dir.join(format!("{stem}.json"));
    save_json(&path, &meta)?;
    Ok(path)
}

pub fn load_samples(meta_path: &Path) -> Result<SampleSet> {
    let meta: SampleMeta = load_json(meta_path)?;
    let data = load_matrix(&sibling(meta_path, &meta.data_file))?;
    if data.rows() != meta.n || data.cols() != meta.p {
        return Err(parse_err(1, format!("sample matrix is {}x{}, sidecar says {}x{}", data.rows(), data.cols(), meta.n, meta.p)));
    }
    let model_id = u64::from_str_radix(&meta.model_id, 16).map_err(|e| parse_err(1, format!("bad model id: {e}")))?;
    Ok(SampleSet::from_data(data, meta.seed, model_id)?)
}
