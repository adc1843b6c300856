//! Text formats: dense matrices, dataset manifests and projection models.
//!
//! A matrix file starts with `rows cols` followed by one line per row of
//! space-separated values printed with 17 significant digits, which
//! round-trips every `f64` exactly. A dataset is a directory holding
//! `manifest.txt` and one matrix file per point:
//!
//! ```text
//! glpp-dataset 1
//! points 3
//! ambient 20
//! subspace 2
//! labeled true
//! entry points/p00000.txt 0
//! ...
//! ```
//!
//! Entry paths are relative to the manifest's directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grassmann::GrassmannPoint;
use crate::tolerance::Tolerances;
use crate::trainer::ProjectionModel;

pub const DATASET_VERSION: u32 = 1;
pub const MODEL_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.txt";

const DATASET_MAGIC: &str = "glpp-dataset";
const MODEL_MAGIC: &str = "glpp-model";

pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a matrix starting at line `first_line` (1-based) of `text`.
fn parse_matrix_lines<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    path: &Path,
) -> Result<DMatrix<f64>> {
    let parse_err = |line: usize, column: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "missing matrix header".into()))?;
    let dims: Vec<(usize, &str)> = tokens(header).collect();
    if dims.len() != 2 {
        return Err(parse_err(hline, 1, format!("expected `rows cols`, found `{header}`")));
    }
    let mut shape = [0usize; 2];
    for (slot, &(col, tok)) in shape.iter_mut().zip(&dims) {
        *slot = tok
            .parse()
            .map_err(|_| parse_err(hline, col, format!("invalid dimension `{tok}`")))?;
    }
    let [rows, cols] = shape;
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| parse_err(hline + r + 1, 1, format!("expected {rows} rows, found {r}")))?;
        let mut count = 0;
        for (c, (col, tok)) in tokens(line).enumerate() {
            if c >= cols {
                return Err(parse_err(lno, col, format!("more than {cols} values in row")));
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(lno, col, format!("invalid number `{tok}`")))?;
            if !v.is_finite() {
                return Err(parse_err(lno, col, format!("non-finite value `{tok}`")));
            }
            m[(r, c)] = v;
            count += 1;
        }
        if count != cols {
            return Err(parse_err(lno, line.len() + 1, format!("expected {cols} values, found {count}")));
        }
    }
    Ok(m)
}

/// Whitespace-separated tokens with their 1-based column.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_ascii_whitespace().map(move |tok| {
        let offset = tok.as_ptr() as usize - line.as_ptr() as usize;
        (offset + 1, tok)
    })
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<DMatrix<f64>> {
    let mut lines = numbered_lines(text);
    let m = parse_matrix_lines(&mut lines, path)?;
    if let Some((lno, _)) = lines.next() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: lno,
            column: 1,
            message: "trailing content after matrix".into(),
        });
    }
    Ok(m)
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    write_atomic(path, format_matrix(m).as_bytes())
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn manifest_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_NAME)
    } else {
        path.to_path_buf()
    }
}

/// Writes `dir/manifest.txt` and `dir/points/pNNNNN.txt`.
pub fn save_dataset(dir: &Path, data: &Dataset) -> Result<()> {
    let (ambient, subspace) = data.dims();
    let mut manifest = format!(
        "{DATASET_MAGIC} {DATASET_VERSION}\npoints {}\nambient {ambient}\nsubspace {subspace}\nlabeled {}\n",
        data.len(),
        data.labels.is_some()
    );
    for (i, x) in data.points.iter().enumerate() {
        let rel = format!("points/p{i:05}.txt");
        write_matrix(&dir.join(&rel), x.basis())?;
        match &data.labels {
            Some(l) => writeln!(manifest, "entry {rel} {}", l[i]),
            None => writeln!(manifest, "entry {rel}"),
        }
        .expect("writing to a String");
    }
    write_atomic(&dir.join(MANIFEST_NAME), manifest.as_bytes())
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    load_dataset_with(path, &Tolerances::default())
}

/// Loads a dataset from a manifest file or a directory containing one,
/// validating every point against the manifest header.
pub fn load_dataset_with(path: &Path, tol: &Tolerances) -> Result<Dataset> {
    let manifest = manifest_path(path);
    let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let text = fs::read_to_string(&manifest).map_err(|e| Error::io(&manifest, e))?;
    let parse_err = |line: usize, column: usize, message: String| Error::Parse {
        path: manifest.clone(),
        line,
        column,
        message,
    };
    let mut lines = numbered_lines(&text);

    let (lno, first) = lines.next().ok_or_else(|| parse_err(1, 1, "empty manifest".into()))?;
    let toks: Vec<(usize, &str)> = tokens(first).collect();
    if toks.len() != 2 || toks[0].1 != DATASET_MAGIC {
        return Err(parse_err(lno, 1, format!("expected `{DATASET_MAGIC} <version>`")));
    }
    let version: u32 = toks[1]
        .1
        .parse()
        .map_err(|_| parse_err(lno, toks[1].0, format!("invalid version `{}`", toks[1].1)))?;
    if version != DATASET_VERSION {
        return Err(Error::Version {
            found: version,
            expected: DATASET_VERSION,
        });
    }

    let mut header = |key: &str| -> Result<(usize, usize, String)> {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| parse_err(lno + 1, 1, format!("missing `{key}` line")))?;
        let toks: Vec<(usize, &str)> = tokens(line).collect();
        if toks.len() != 2 || toks[0].1 != key {
            return Err(parse_err(lno, 1, format!("expected `{key} <value>`")));
        }
        Ok((lno, toks[1].0, toks[1].1.to_string()))
    };
    let mut numeric = |key: &str| -> Result<usize> {
        let (lno, col, v) = header(key)?;
        v.parse()
            .map_err(|_| parse_err(lno, col, format!("invalid {key} `{v}`")))
    };
    let count = numeric("points")?;
    let ambient = numeric("ambient")?;
    let subspace = numeric("subspace")?;
    let (llno, lcol, labeled) = header("labeled")?;
    let labeled = match labeled.as_str() {
        "true" => true,
        "false" => false,
        other => return Err(parse_err(llno, lcol, format!("invalid labeled flag `{other}`"))),
    };

    let mut points = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for (lno, line) in lines {
        let toks: Vec<(usize, &str)> = tokens(line).collect();
        if toks[0].1 != "entry" || toks.len() < 2 {
            return Err(parse_err(lno, 1, "expected `entry <path> [label]`".into()));
        }
        let rel = toks[1].1;
        match (labeled, toks.len()) {
            (true, 3) => labels.push(
                toks[2]
                    .1
                    .parse::<usize>()
                    .map_err(|_| parse_err(lno, toks[2].0, format!("invalid label `{}`", toks[2].1)))?,
            ),
            (false, 2) => {}
            _ => {
                return Err(parse_err(
                    lno,
                    1,
                    format!("entry must {} a label", if labeled { "carry" } else { "not carry" }),
                ))
            }
        }
        points.push(load_point(&base.join(rel), rel, ambient, subspace, tol)?);
    }
    if points.len() != count {
        return Err(Error::Validation {
            entry: manifest.display().to_string(),
            message: format!("header declares {count} points, found {} entries", points.len()),
        });
    }
    if count == 0 {
        return Err(Error::Validation {
            entry: manifest.display().to_string(),
            message: "dataset has no points".into(),
        });
    }
    Dataset::new(points, labeled.then_some(labels))
}

fn load_point(path: &Path, entry: &str, ambient: usize, subspace: usize, tol: &Tolerances) -> Result<GrassmannPoint> {
    let invalid = |message: String| Error::Validation {
        entry: entry.to_string(),
        message,
    };
    if !path.is_file() {
        return Err(invalid(format!("point file {} does not exist", path.display())));
    }
    let m = read_matrix(path)?;
    if m.shape() != (ambient, subspace) {
        return Err(invalid(format!(
            "point is {}x{} but the manifest declares {ambient}x{subspace}",
            m.nrows(),
            m.ncols()
        )));
    }
    GrassmannPoint::with_tolerances(m, tol).map_err(|e| invalid(e.to_string()))
}

/// Serializes a model: one `key=value` header line, then `A` as a matrix.
/// `extra` pairs are appended to the header verbatim.
pub fn format_model(model: &ProjectionModel, extra: &[(String, String)]) -> String {
    let mut header = format!(
        "{MODEL_MAGIC} version={MODEL_VERSION} D={} d={} p={} N={} seed={} ridge={:.16e} iterations={} converged={}",
        model.ambient_dim,
        model.target_dim,
        model.subspace_dim,
        model.n_train,
        model.seed,
        model.ridge,
        model.iterations_run,
        model.converged
    );
    for (k, v) in extra {
        write!(header, " {k}={v}").expect("writing to a String");
    }
    header.push('\n');
    header + &format_matrix(&model.projection)
}

pub fn write_model(path: &Path, model: &ProjectionModel, extra: &[(String, String)]) -> Result<()> {
    write_atomic(path, format_model(model, extra).as_bytes())
}

pub fn parse_model(text: &str, path: &Path) -> Result<ProjectionModel> {
    let parse_err = |line: usize, column: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };
    let mut lines = numbered_lines(text);
    let (lno, header) = lines.next().ok_or_else(|| parse_err(1, 1, "empty model file".into()))?;
    let mut toks = tokens(header);
    match toks.next() {
        Some((_, MODEL_MAGIC)) => {}
        _ => return Err(parse_err(lno, 1, format!("expected `{MODEL_MAGIC}` header"))),
    }
    let mut fields = std::collections::BTreeMap::new();
    for (col, tok) in toks {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(lno, col, format!("expected key=value, found `{tok}`")))?;
        fields.insert(k, (col, v));
    }
    let get = |key: &str| -> Result<(usize, &str)> {
        fields
            .get(key)
            .copied()
            .ok_or_else(|| parse_err(lno, 1, format!("missing header field `{key}`")))
    };
    fn num<T: std::str::FromStr>(
        (col, v): (usize, &str),
        key: &str,
        err: &dyn Fn(usize, usize, String) -> Error,
        lno: usize,
    ) -> Result<T> {
        v.parse().map_err(|_| err(lno, col, format!("invalid {key} `{v}`")))
    }
    let version: u32 = num(get("version")?, "version", &parse_err, lno)?;
    if version != MODEL_VERSION {
        return Err(Error::Version {
            found: version,
            expected: MODEL_VERSION,
        });
    }
    let ambient: usize = num(get("D")?, "D", &parse_err, lno)?;
    let target: usize = num(get("d")?, "d", &parse_err, lno)?;
    let subspace: usize = num(get("p")?, "p", &parse_err, lno)?;
    let n_train: usize = num(get("N")?, "N", &parse_err, lno)?;
    let seed: u64 = num(get("seed")?, "seed", &parse_err, lno)?;
    let ridge: f64 = num(get("ridge")?, "ridge", &parse_err, lno)?;
    let iterations: usize = num(get("iterations")?, "iterations", &parse_err, lno)?;
    let converged: bool = num(get("converged")?, "converged", &parse_err, lno)?;
    let projection = parse_matrix_lines(&mut lines, path)?;
    if projection.shape() != (ambient, target) {
        return Err(Error::Validation {
            entry: path.display().to_string(),
            message: format!(
                "projection is {}x{} but the header declares {ambient}x{target}",
                projection.nrows(),
                projection.ncols()
            ),
        });
    }
    Ok(ProjectionModel {
        projection,
        ambient_dim: ambient,
        subspace_dim: subspace,
        target_dim: target,
        n_train,
        seed,
        ridge,
        iterations_run: iterations,
        converged,
        objective_trace: Vec::new(),
        training: None,
    })
}

pub fn read_model(path: &Path) -> Result<ProjectionModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, path)
}
