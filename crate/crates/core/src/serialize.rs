//! JSON wire formats for points and charts. Matrices are row-major arrays of
//! [re, im] pairs. Round-trips are guaranteed to 1e-12, not bit-exactly.

use crate::darboux::DarbouxPoint;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::quiver::{CyclicData, Point, QuiverParams, TadpoleData};
use serde::{Deserialize, Serialize};

fn c_to_pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn pair_to_c(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn mat_to_rows(m: &CMatrix) -> Vec<[f64; 2]> {
    m.data().iter().map(|&z| c_to_pair(z)).collect()
}

fn rows_to_mat(rows: usize, cols: usize, data: &[[f64; 2]]) -> Result<CMatrix> {
    if data.len() != rows * cols {
        return Err(Error::ShapeMismatch(format!(
            "expected {} entries, got {}",
            rows * cols,
            data.len()
        )));
    }
    CMatrix::new(rows, cols, data.iter().map(|&p| pair_to_c(p)).collect())
}

/// Point format: {"m", "n", "q", "X", "Z", "V", "W"}. The tadpole case
/// (m = 1) stores Z = Y + X^{-1} and therefore requires X invertible.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointJson {
    pub m: usize,
    pub n: usize,
    pub q: Vec<[f64; 2]>,
    #[serde(rename = "X")]
    pub x: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "Z")]
    pub z: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "V")]
    pub v: Vec<[f64; 2]>,
    #[serde(rename = "W")]
    pub w: Vec<[f64; 2]>,
}

pub fn point_to_json(point: &Point, params: &QuiverParams) -> Result<PointJson> {
    let n = point.n();
    let (xs, zs, v, w) = match point {
        Point::Tadpole(d) => (
            vec![mat_to_rows(&d.x)],
            vec![mat_to_rows(&d.z()?)],
            d.v.clone(),
            d.w.clone(),
        ),
        Point::Cyclic(d) => (
            (0..d.m()).map(|s| mat_to_rows(d.x_s(s))).collect(),
            (0..d.m()).map(|s| mat_to_rows(d.z_s(s))).collect(),
            d.v.clone(),
            d.w.clone(),
        ),
    };
    Ok(PointJson {
        m: point.m(),
        n,
        q: params.q().iter().map(|&z| c_to_pair(z)).collect(),
        x: xs,
        z: zs,
        v: mat_to_rows(&v),
        w: mat_to_rows(&w),
    })
}

pub fn point_from_json(json: &PointJson) -> Result<(Point, QuiverParams)> {
    let (m, n) = (json.m, json.n);
    let params = QuiverParams::new(m, n, json.q.iter().map(|&p| pair_to_c(p)).collect())?;
    if json.x.len() != m || json.z.len() != m {
        return Err(Error::ShapeMismatch("X/Z block count differs from m".into()));
    }
    let v = rows_to_mat(n, 1, &json.v)?;
    let w = rows_to_mat(1, n, &json.w)?;
    let point = if m == 1 {
        let x = rows_to_mat(n, n, &json.x[0])?;
        let z = rows_to_mat(n, n, &json.z[0])?;
        let y = &z - &x.inverse()?;
        Point::Tadpole(TadpoleData::new(x, y, v, w)?)
    } else {
        let xs = json.x.iter().map(|r| rows_to_mat(n, n, r)).collect::<Result<_>>()?;
        let zs = json.z.iter().map(|r| rows_to_mat(n, n, r)).collect::<Result<_>>()?;
        Point::Cyclic(CyclicData::new(xs, zs, v, w)?)
    };
    Ok((point, params))
}

/// Chart format: {"n", "t", "x", "sigma"}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartJson {
    pub n: usize,
    pub t: [f64; 2],
    pub x: Vec<[f64; 2]>,
    pub sigma: Vec<[f64; 2]>,
}

pub fn chart_to_json(pt: &DarbouxPoint) -> ChartJson {
    ChartJson {
        n: pt.n(),
        t: c_to_pair(pt.t),
        x: pt.x.iter().map(|&z| c_to_pair(z)).collect(),
        sigma: pt.sigma.iter().map(|&z| c_to_pair(z)).collect(),
    }
}

pub fn chart_from_json(json: &ChartJson) -> Result<DarbouxPoint> {
    if json.x.len() != json.n || json.sigma.len() != json.n {
        return Err(Error::ShapeMismatch("coordinate count differs from n".into()));
    }
    DarbouxPoint::new(
        json.x.iter().map(|&p| pair_to_c(p)).collect(),
        json.sigma.iter().map(|&p| pair_to_c(p)).collect(),
        pair_to_c(json.t),
    )
}
