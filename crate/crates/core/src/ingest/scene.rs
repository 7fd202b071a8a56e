use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelType;
use crate::point::{DataPoint, PointSet};

/// A point set on disk with optional ground truth and camera intrinsics.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub model_type: ModelType,
    pub points: PointSet,
    /// 0 = outlier, `j` = inlier of ground-truth instance `j`.
    pub labels: Option<Vec<u32>>,
    pub intrinsics: Option<Matrix3<f64>>,
    /// Second-view intrinsics when they differ from the first.
    pub intrinsics2: Option<Matrix3<f64>>,
}

impl Scene {
    pub fn new(model_type: ModelType, points: PointSet) -> Self {
        Self { model_type, points, labels: None, intrinsics: None, intrinsics2: None }
    }

    /// Intrinsics of both views; the second defaults to the first.
    pub fn cameras(&self) -> Option<(Matrix3<f64>, Matrix3<f64>)> {
        self.intrinsics.map(|k1| (k1, self.intrinsics2.unwrap_or(k1)))
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_matrix(line: usize, s: &str) -> Result<Matrix3<f64>> {
    let v: Vec<f64> = s
        .split(';')
        .map(|t| t.trim().parse::<f64>().map_err(|_| perr(line, format!("bad intrinsics value '{t}'"))))
        .collect::<Result<_>>()?;
    if v.len() != 9 {
        return Err(perr(line, format!("intrinsics need 9 values, got {}", v.len())));
    }
    Ok(Matrix3::from_row_slice(&v))
}

fn format_matrix(m: &Matrix3<f64>) -> String {
    (0..3).flat_map(|r| (0..3).map(move |c| m[(r, c)])).map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

/// Parses the CSV scene format. The header is
/// `model_type,dim[,labeled][,weighted][,ranked][,intrinsics=k11;..;k33][,intrinsics2=...]`;
/// each row holds the coordinates, then the weight, rank and label columns
/// announced in the header, in that order. An empty rank cell means unranked.
pub fn parse_scene_csv(text: &str) -> Result<Scene> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty scene file"))?;
    let hline = hline + 1;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if fields.len() < 2 {
        return Err(perr(hline, "header needs model_type and dim"));
    }
    let model_type: ModelType = fields[0].parse().map_err(|e: Error| perr(hline, e.to_string()))?;
    let dim: usize = fields[1].parse().map_err(|_| perr(hline, format!("bad dimension '{}'", fields[1])))?;
    if dim != model_type.point_dim() {
        return Err(Error::DimensionMismatch { expected: model_type.point_dim(), found: dim });
    }
    let (mut labeled, mut weighted, mut ranked) = (false, false, false);
    let (mut k1, mut k2) = (None, None);
    for f in &fields[2..] {
        match *f {
            "labeled" => labeled = true,
            "weighted" => weighted = true,
            "ranked" => ranked = true,
            f if f.starts_with("intrinsics=") => k1 = Some(parse_matrix(hline, &f["intrinsics=".len()..])?),
            f if f.starts_with("intrinsics2=") => k2 = Some(parse_matrix(hline, &f["intrinsics2=".len()..])?),
            other => return Err(perr(hline, format!("unknown header field '{other}'"))),
        }
    }
    let ncols = dim + weighted as usize + ranked as usize + labeled as usize;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != ncols {
            return Err(Error::DimensionMismatch { expected: ncols, found: cells.len() });
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| perr(lineno, format!("bad number '{s}'")));
        let coords: Vec<f64> = cells[..dim].iter().map(|c| num(c)).collect::<Result<_>>()?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(perr(lineno, "non-finite coordinate"));
        }
        let mut p = DataPoint::new(&coords);
        let mut col = dim;
        if weighted {
            let w = num(cells[col])?;
            if !(w >= 0.0 && w.is_finite()) {
                return Err(perr(lineno, format!("invalid weight {w}")));
            }
            p.weight = w;
            col += 1;
        }
        if ranked {
            if !cells[col].is_empty() {
                p.quality_rank = Some(cells[col].parse().map_err(|_| perr(lineno, format!("bad rank '{}'", cells[col])))?);
            }
            col += 1;
        }
        if labeled {
            labels.push(cells[col].parse::<u32>().map_err(|_| perr(lineno, format!("bad label '{}'", cells[col])))?);
        }
        points.push(p);
    }
    Ok(Scene {
        model_type,
        points: PointSet::new(points),
        labels: labeled.then_some(labels),
        intrinsics: k1,
        intrinsics2: k2,
    })
}

/// Canonical CSV rendering; `parse_scene_csv` inverts it exactly.
pub fn scene_to_csv(scene: &Scene) -> String {
    let weighted = scene.points.iter().any(|p| p.weight != 1.0);
    let ranked = scene.points.is_ranked();
    let mut out = format!("{},{}", scene.model_type, scene.model_type.point_dim());
    if scene.labels.is_some() {
        out.push_str(",labeled");
    }
    if weighted {
        out.push_str(",weighted");
    }
    if ranked {
        out.push_str(",ranked");
    }
    if let Some(k) = &scene.intrinsics {
        let _ = write!(out, ",intrinsics={}", format_matrix(k));
    }
    if let Some(k) = &scene.intrinsics2 {
        let _ = write!(out, ",intrinsics2={}", format_matrix(k));
    }
    out.push('\n');
    for (i, p) in scene.points.iter().enumerate() {
        let mut cells: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
        if weighted {
            cells.push(p.weight.to_string());
        }
        if ranked {
            cells.push(p.quality_rank.map(|r| r.to_string()).unwrap_or_default());
        }
        if let Some(labels) = &scene.labels {
            cells.push(labels[i].to_string());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
struct JsonPoint {
    coords: Vec<f64>,
    #[serde(default = "unit", skip_serializing_if = "is_unit")]
    weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rank: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<u32>,
}

fn unit() -> f64 {
    1.0
}

fn is_unit(w: &f64) -> bool {
    *w == 1.0
}

#[derive(Serialize, Deserialize)]
struct JsonScene {
    model_type: ModelType,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intrinsics: Option<[[f64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intrinsics2: Option<[[f64; 3]; 3]>,
    points: Vec<JsonPoint>,
}

fn to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [[m[(0, 0)], m[(0, 1)], m[(0, 2)]], [m[(1, 0)], m[(1, 1)], m[(1, 2)]], [m[(2, 0)], m[(2, 1)], m[(2, 2)]]]
}

fn from_rows(r: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_row_slice(&r.concat())
}

/// JSON mirror of the CSV format.
pub fn parse_scene_json(text: &str) -> Result<Scene> {
    let js: JsonScene = serde_json::from_str(text).map_err(|e| perr(e.line(), e.to_string()))?;
    if js.dim != js.model_type.point_dim() {
        return Err(Error::DimensionMismatch { expected: js.model_type.point_dim(), found: js.dim });
    }
    let any_label = js.points.iter().any(|p| p.label.is_some());
    let mut labels = Vec::new();
    let mut points = Vec::new();
    for (i, p) in js.points.into_iter().enumerate() {
        if p.coords.len() != js.dim {
            return Err(Error::DimensionMismatch { expected: js.dim, found: p.coords.len() });
        }
        if p.coords.iter().any(|c| !c.is_finite()) || !(p.weight >= 0.0 && p.weight.is_finite()) {
            return Err(perr(0, format!("invalid values in point {i}")));
        }
        if any_label {
            labels.push(p.label.ok_or_else(|| perr(0, format!("point {i} lacks a label")))?);
        }
        let mut dp = DataPoint::new(&p.coords).with_weight(p.weight);
        dp.quality_rank = p.rank;
        points.push(dp);
    }
    Ok(Scene {
        model_type: js.model_type,
        points: PointSet::new(points),
        labels: any_label.then_some(labels),
        intrinsics: js.intrinsics.as_ref().map(from_rows),
        intrinsics2: js.intrinsics2.as_ref().map(from_rows),
    })
}

pub fn scene_to_json(scene: &Scene) -> String {
    let js = JsonScene {
        model_type: scene.model_type,
        dim: scene.model_type.point_dim(),
        intrinsics: scene.intrinsics.as_ref().map(to_rows),
        intrinsics2: scene.intrinsics2.as_ref().map(to_rows),
        points: scene
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| JsonPoint {
                coords: p.coords().to_vec(),
                weight: p.weight,
                rank: p.quality_rank,
                label: scene.labels.as_ref().map(|l| l[i]),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&js).expect("scene serialises") + "\n"
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Loads a scene; `.json` files use the JSON format, everything else CSV.
pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let scene = if is_json(path) { parse_scene_json(&text)? } else { parse_scene_csv(&text)? };
    if let Some(labels) = &scene.labels {
        if labels.len() != scene.points.len() {
            return Err(Error::LabelMismatch { labels: labels.len(), points: scene.points.len() });
        }
    }
    Ok(scene)
}

pub fn save_scene(scene: &Scene, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = if is_json(path) { scene_to_json(scene) } else { scene_to_csv(scene) };
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
