//! Artifact serialization: CSV tables, density rasters, and structured
//! JSON for operators and basis families.

use serde_json::{json, Value};

use crate::attractor::PointCloud;
use crate::bimodule::{BasisFamily, BasisKind};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measure::{AtomicMeasure, MeasureKind};
use crate::operators::{Entries, OperatorMatrix};
use crate::scalar::{as_f64, Real, C};

fn point_fields<R: Real>(p: &Point<R>) -> Vec<String> {
    match p {
        Point::Euclidean(v) => v.iter().map(|&x| format!("{}", as_f64(x))).collect(),
        // symbolic points become a single dash-joined column
        Point::Word(w) => {
            vec![w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("-")]
        }
    }
}

/// One point per row; Euclidean coordinates as columns, words as a single
/// dash-joined column.
pub fn cloud_to_csv<R: Real>(cloud: &PointCloud<R>) -> String {
    let mut out = String::new();
    for p in &cloud.points {
        out.push_str(&point_fields(p).join(","));
        out.push('\n');
    }
    out
}

/// Histogram counts of 1-D coordinates over `bins` equal cells of [lo, hi].
fn histogram_1d<R: Real>(cloud: &PointCloud<R>, bins: usize) -> Result<(Vec<usize>, f64, f64)> {
    let xs: Vec<f64> = cloud
        .points
        .iter()
        .map(|p| p.as_coords().map(|c| as_f64(c[0])))
        .collect::<Result<Vec<_>>>()?;
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-300);
    let mut counts = vec![0usize; bins];
    for x in xs {
        let k = (((x - lo) / span) * bins as f64) as usize;
        counts[k.min(bins - 1)] += 1;
    }
    Ok((counts, lo, hi))
}

/// 1-D density raster as an ASCII PGM image: `bins` columns, a fixed band
/// height, brightness proportional to bin occupancy.
pub fn cloud_to_pgm<R: Real>(cloud: &PointCloud<R>, bins: usize) -> Result<String> {
    if cloud.is_empty() || bins == 0 {
        return Err(Error::Input("raster needs a non-empty cloud and bins > 0".into()));
    }
    if cloud.points[0].dim() != 1 || !matches!(cloud.points[0], Point::Euclidean(_)) {
        return Err(Error::Unsupported("PGM raster is for 1-D Euclidean clouds".into()));
    }
    let (counts, _, _) = histogram_1d(cloud, bins)?;
    let peak = counts.iter().copied().max().unwrap_or(1).max(1);
    let height = 32usize;
    let mut out = format!("P2\n{bins} {height}\n255\n");
    let row: Vec<String> = counts
        .iter()
        .map(|&c| ((255 * c) / peak).to_string())
        .collect();
    let line = row.join(" ");
    for _ in 0..height {
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// 2-D density raster as an ASCII PPM image (grayscale triples).
pub fn cloud_to_ppm<R: Real>(cloud: &PointCloud<R>, width: usize, height: usize) -> Result<String> {
    if cloud.is_empty() || width == 0 || height == 0 {
        return Err(Error::Input("raster needs a non-empty cloud and positive size".into()));
    }
    let coords: Vec<(f64, f64)> = cloud
        .points
        .iter()
        .map(|p| {
            let c = p.as_coords()?;
            if c.len() != 2 {
                return Err(Error::Unsupported("PPM raster is for 2-D clouds".into()));
            }
            Ok((as_f64(c[0]), as_f64(c[1])))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut xlo, mut xhi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &coords {
        xlo = xlo.min(x);
        xhi = xhi.max(x);
        ylo = ylo.min(y);
        yhi = yhi.max(y);
    }
    let (xspan, yspan) = ((xhi - xlo).max(1e-300), (yhi - ylo).max(1e-300));
    let mut counts = vec![0usize; width * height];
    for (x, y) in coords {
        let i = (((x - xlo) / xspan) * width as f64) as usize;
        // image rows run top to bottom
        let j = height - 1 - ((((y - ylo) / yspan) * height as f64) as usize).min(height - 1);
        counts[j * width + i.min(width - 1)] += 1;
    }
    let peak = counts.iter().copied().max().unwrap_or(1).max(1);
    let mut out = format!("P3\n{width} {height}\n255\n");
    for j in 0..height {
        let row: Vec<String> = (0..width)
            .map(|i| {
                let v = (255 * counts[j * width + i]) / peak;
                format!("{v} {v} {v}")
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// Atom per row: coordinates (or dash-joined word), then the weight.
pub fn measure_to_csv<R: Real>(mu: &AtomicMeasure<R>) -> String {
    let mut out = String::new();
    for (p, w) in &mu.atoms {
        let mut fields = point_fields(p);
        fields.push(format!("{}", as_f64(*w)));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn measure_sidecar<R: Real>(system: &str, mu: &AtomicMeasure<R>) -> Value {
    json!({
        "system": system,
        "depth": mu.depth,
        "kind": match mu.kind {
            MeasureKind::Deterministic => "deterministic",
            MeasureKind::Empirical => "empirical",
        },
    })
}

/// Parse the measure CSV form back into atoms.
pub fn measure_from_csv<R: Real>(text: &str, depth: usize, kind: MeasureKind) -> Result<AtomicMeasure<R>> {
    let mut atoms = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 2 {
            return Err(Error::Input(format!("measure CSV line {} too short", lineno + 1)));
        }
        let w: f64 = fields[fields.len() - 1]
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad weight on line {}", lineno + 1)))?;
        let point = if fields.len() == 2 && fields[0].contains('-') {
            let symbols = fields[0]
                .trim()
                .split('-')
                .map(|s| s.parse().map_err(|_| Error::Input(format!("bad symbol on line {}", lineno + 1))))
                .collect::<Result<Vec<u8>>>()?;
            Point::Word(symbols)
        } else {
            let coords = fields[..fields.len() - 1]
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map(crate::scalar::r)
                        .map_err(|_| Error::Input(format!("bad coordinate on line {}", lineno + 1)))
                })
                .collect::<Result<Vec<R>>>()?;
            Point::Euclidean(coords)
        };
        atoms.push((point, crate::scalar::r(w)));
    }
    if atoms.is_empty() {
        return Err(Error::Input("measure CSV has no atoms".into()));
    }
    Ok(AtomicMeasure { atoms, depth, kind })
}

/// 1-D CDF table: sorted position, cumulative mass.
pub fn cdf_to_csv<R: Real>(mu: &AtomicMeasure<R>) -> Result<String> {
    let mut rows: Vec<(f64, f64)> = mu
        .atoms
        .iter()
        .map(|(p, w)| {
            let c = p.as_coords()?;
            if c.len() != 1 {
                return Err(Error::Unsupported("CDF export is 1-D only".into()));
            }
            Ok((as_f64(c[0]), as_f64(*w)))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out = String::new();
    let mut cum = 0.0;
    for (x, w) in rows {
        cum += w;
        out.push_str(&format!("{x},{cum}\n"));
    }
    Ok(out)
}

fn complex_pair<R: Real>(z: &C<R>) -> Value {
    json!([as_f64(z.re), as_f64(z.im)])
}

/// Structured operator form: the cheap representations keep their shape,
/// dense blocks serialize entrywise as [re, im] pairs.
pub fn operator_to_json<R: Real>(op: &OperatorMatrix<R>) -> Value {
    match &op.entries {
        Entries::Diagonal(d) => json!({
            "kind": "diagonal",
            "data": d.iter().map(complex_pair).collect::<Vec<_>>(),
        }),
        Entries::Selector(cols) => json!({
            "kind": "selector",
            "data": cols,
        }),
        Entries::Transfer { n } => json!({
            "kind": "transfer",
            "data": n,
        }),
        Entries::Dense { rows, cols, data } => json!({
            "kind": "dense",
            "rows": rows,
            "cols": cols,
            "data": data.iter().map(complex_pair).collect::<Vec<_>>(),
        }),
    }
}

/// Dense CSV: one matrix row per line, complex entries as re@im.
pub fn operator_to_csv<R: Real>(op: &OperatorMatrix<R>) -> String {
    let dense = op.to_dense();
    let Entries::Dense { rows, cols, data } = &dense.entries else { unreachable!() };
    let mut out = String::new();
    for i in 0..*rows {
        let row: Vec<String> = (0..*cols)
            .map(|j| {
                let z = &data[i * cols + j];
                if z.im == R::zero() {
                    format!("{}", as_f64(z.re))
                } else {
                    format!("{}@{}", as_f64(z.re), as_f64(z.im))
                }
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Basis family export: kind, per-element label and support cells, and the
/// dyadic breakpoints of the bump profiles.
pub fn basis_to_json<R: Real>(basis: &BasisFamily<R>) -> Value {
    let elements: Vec<Value> = basis
        .elements
        .iter()
        .zip(&basis.labels)
        .map(|(u, label)| {
            let support: Vec<usize> = u
                .values
                .iter()
                .enumerate()
                .filter(|(_, v)| v.norm() > R::zero())
                .map(|(i, _)| i)
                .collect();
            json!({"label": label, "support": support})
        })
        .collect();
    json!({
        "kind": match basis.kind {
            BasisKind::Cylinder => "cylinder",
            BasisKind::PartitionOfUnity => "partition-of-unity",
        },
        "system": basis.space.system.name,
        "depth": basis.space.depth,
        "breakpoints": basis.breakpoints,
        "reconstruction_bound": basis.reconstruction_bound,
        "elements": elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attractor::attractor_deterministic;
    use crate::cells::cell_space;
    use crate::ifs::builtin;
    use crate::measure::self_similar_measure;
    use std::sync::Arc;

    #[test]
    fn cloud_csv_roundtrip_shape() {
        let sys = builtin::<f64>("tent").unwrap();
        let seed = sys.seed_point().unwrap();
        let cloud = attractor_deterministic(&sys, 3, &seed).unwrap();
        let csv = cloud_to_csv(&cloud);
        assert_eq!(csv.lines().count(), 8);
        assert!(csv.lines().all(|l| l.parse::<f64>().is_ok()));
    }

    #[test]
    fn word_cloud_csv() {
        let sys = builtin::<f64>("shift:2").unwrap();
        let seed = sys.seed_point().unwrap();
        let cloud = attractor_deterministic(&sys, 2, &seed).unwrap();
        let csv = cloud_to_csv(&cloud);
        assert!(csv.lines().next().unwrap().contains('-'));
    }

    #[test]
    fn pgm_header_and_cantor_gap() {
        let sys = builtin::<f64>("cantor").unwrap();
        let seed = sys.seed_point().unwrap();
        let cloud = attractor_deterministic(&sys, 8, &seed).unwrap();
        let pgm = cloud_to_pgm(&cloud, 27).unwrap();
        let mut lines = pgm.lines();
        assert_eq!(lines.next(), Some("P2"));
        assert_eq!(lines.next(), Some("27 32"));
        assert_eq!(lines.next(), Some("255"));
        let row: Vec<u32> = lines.next().unwrap().split(' ').map(|s| s.parse().unwrap()).collect();
        // middle third of the Cantor set is empty
        assert!(row[9..18].iter().all(|&v| v == 0), "{row:?}");
        assert!(row[0] > 0 && row[26] > 0);
    }

    #[test]
    fn ppm_shape() {
        let sys = builtin::<f64>("sierpinski").unwrap();
        let seed = sys.seed_point().unwrap();
        let cloud = attractor_deterministic(&sys, 5, &seed).unwrap();
        let ppm = cloud_to_ppm(&cloud, 16, 16).unwrap();
        assert!(ppm.starts_with("P3\n16 16\n255\n"));
        assert_eq!(ppm.lines().count(), 3 + 16);
    }

    #[test]
    fn measure_csv_roundtrip() {
        let sys = builtin::<f64>("cantor").unwrap();
        let mu = self_similar_measure(&sys, 4).unwrap();
        let csv = measure_to_csv(&mu);
        let back = measure_from_csv::<f64>(&csv, mu.depth, mu.kind).unwrap();
        assert_eq!(back.atoms.len(), mu.atoms.len());
        assert!((back.total_mass() - 1.0).abs() < 1e-12);
        for ((p, w), (q, v)) in mu.atoms.iter().zip(&back.atoms) {
            assert!(crate::geometry::distance(p, q).unwrap() < 1e-12);
            assert!((w - v).abs() < 1e-12);
        }

        let sidecar = measure_sidecar("cantor", &mu);
        assert_eq!(sidecar["depth"], 4);
        assert_eq!(sidecar["kind"], "deterministic");
    }

    #[test]
    fn cdf_is_monotone_to_one() {
        let sys = builtin::<f64>("tent").unwrap();
        let mu = self_similar_measure(&sys, 6).unwrap();
        let csv = cdf_to_csv(&mu).unwrap();
        let last = csv.lines().last().unwrap();
        let cum: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
        assert!((cum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_json_kinds() {
        let sys = Arc::new(builtin::<f64>("shift:2").unwrap());
        let space = cell_space(&sys, 3).unwrap();
        let comp = crate::operators::comp_op(&space).unwrap();
        let j = operator_to_json(&comp);
        assert_eq!(j["kind"], "selector");
        let transfer = crate::operators::transfer_op(&space).unwrap();
        assert_eq!(operator_to_json(&transfer)["kind"], "transfer");
        let dense = comp.to_dense();
        let j = operator_to_json(&dense);
        assert_eq!(j["kind"], "dense");
        assert_eq!(j["rows"], 8);

        let csv = operator_to_csv(&comp);
        assert_eq!(csv.lines().count(), 8);
    }

    #[test]
    fn basis_json_supports() {
        let sys = Arc::new(builtin::<f64>("shift:2").unwrap());
        let space = cell_space(&sys, 2).unwrap();
        let basis = crate::bimodule::cylinder_basis(&space).unwrap();
        let j = basis_to_json(&basis);
        assert_eq!(j["kind"], "cylinder");
        assert_eq!(j["elements"][0]["support"], json!([0, 1]));
        assert_eq!(j["elements"][1]["support"], json!([2, 3]));
    }
}
