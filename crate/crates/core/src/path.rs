//! Discrete stand-in for C([0,T]; R^d): piecewise-linear paths on strictly
//! increasing time grids, with the sup norm, stopped seminorms, the
//! pseudometric d_infinity, dyadic polygonal reconstruction and the modulus
//! of continuity. Query times are inserted into grids rather than rounded,
//! so stopping and merging stay exact on the representable class.

use crate::error::{Error, Result};
use crate::la::norm2;

/// Relative tolerance for identifying grid times.
pub const TIME_EPS: f64 = 1e-12;

/// Strictly increasing times spanning [0, T].
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::domain("time grid needs at least 2 nodes"));
        }
        if times[0] != 0.0 {
            return Err(Error::domain(format!(
                "time grid must start at 0, got {}",
                times[0]
            )));
        }
        for pair in times.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::domain(format!(
                    "time grid not strictly increasing at {} -> {}",
                    pair[0], pair[1]
                )));
            }
        }
        if !times.iter().all(|t| t.is_finite()) {
            return Err(Error::domain("non-finite grid time"));
        }
        Ok(TimeGrid { times })
    }

    pub fn uniform(span: f64, segments: usize) -> Result<Self> {
        if !(span > 0.0) || segments == 0 {
            return Err(Error::domain("uniform grid needs span > 0 and segments >= 1"));
        }
        let times = (0..=segments)
            .map(|j| span * j as f64 / segments as f64)
            .collect();
        TimeGrid::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn span(&self) -> f64 {
        *self.times.last().unwrap()
    }
}

/// Continuous d-dimensional path, linear between grid nodes. Evaluation
/// beyond the last node freezes at the final value, matching the stopped
/// extension used by the simulator.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    grid: TimeGrid,
    values: Vec<Vec<f64>>,
    dim: usize,
}

impl Path {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let grid = TimeGrid::new(times)?;
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "{} grid nodes but {} value rows",
                grid.len(),
                values.len()
            )));
        }
        let dim = values[0].len();
        if dim == 0 {
            return Err(Error::domain("path dimension must be >= 1"));
        }
        for row in &values {
            if row.len() != dim {
                return Err(Error::domain("inconsistent value dimensions"));
            }
            if !row.iter().all(|x| x.is_finite()) {
                return Err(Error::domain("non-finite path value"));
            }
        }
        Ok(Path { grid, values, dim })
    }

    pub fn constant(dim: usize, span: f64, value: &[f64]) -> Result<Self> {
        if value.len() != dim {
            return Err(Error::domain("constant value has wrong dimension"));
        }
        Path::new(vec![0.0, span], vec![value.to_vec(), value.to_vec()])
    }

    /// Sample a closure on a grid.
    pub fn from_fn<F: FnMut(f64) -> Vec<f64>>(times: Vec<f64>, mut f: F) -> Result<Self> {
        let values = times.iter().map(|&s| f(s)).collect();
        Path::new(times, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn span(&self) -> f64 {
        self.grid.span()
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place node values (mollifier hot path; row lengths must not change).
    pub(crate) fn values_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.values
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let times = self.grid.times();
        if s <= times[0] {
            return (0, 0.0);
        }
        if s >= *times.last().unwrap() {
            return (times.len() - 2, 1.0);
        }
        let idx = match times.binary_search_by(|t| t.partial_cmp(&s).unwrap()) {
            Ok(i) => return (i.min(times.len() - 2), if i == times.len() - 1 { 1.0 } else { 0.0 }),
            Err(i) => i - 1,
        };
        let frac = (s - times[idx]) / (times[idx + 1] - times[idx]);
        (idx, frac)
    }

    /// Linear interpolation; clamped (frozen) outside the grid span.
    pub fn value_at(&self, s: f64) -> Vec<f64> {
        let (idx, frac) = self.locate(s);
        if frac == 0.0 {
            return self.values[idx].clone();
        }
        if frac == 1.0 {
            return self.values[idx + 1].clone();
        }
        self.values[idx]
            .iter()
            .zip(&self.values[idx + 1])
            .map(|(a, b)| a + frac * (b - a))
            .collect()
    }

    /// Euclidean norm of the value at s.
    pub fn abs_at(&self, s: f64) -> f64 {
        norm2(&self.value_at(s))
    }

    fn time_tol(&self) -> f64 {
        TIME_EPS * self.span().max(1.0)
    }

    /// Index of a grid node at time t, inserting one if absent.
    pub fn with_node_at(&self, t: f64) -> (Path, usize) {
        let tol = self.time_tol();
        let times = self.grid.times();
        for (i, &ti) in times.iter().enumerate() {
            if (ti - t).abs() <= tol {
                return (self.clone(), i);
            }
        }
        let mut new_times = Vec::with_capacity(times.len() + 1);
        let mut new_values = Vec::with_capacity(times.len() + 1);
        let mut inserted = None;
        for (i, &ti) in times.iter().enumerate() {
            if inserted.is_none() && ti > t {
                inserted = Some(new_times.len());
                new_times.push(t);
                new_values.push(self.value_at(t));
            }
            new_times.push(ti);
            new_values.push(self.values[i].clone());
        }
        if inserted.is_none() {
            inserted = Some(new_times.len());
            new_times.push(t.max(times[times.len() - 1] + tol));
            new_values.push(self.values[times.len() - 1].clone());
        }
        (
            Path {
                grid: TimeGrid { times: new_times },
                values: new_values,
                dim: self.dim,
            },
            inserted.unwrap(),
        )
    }

    /// x(. ^ t): frozen at x(t) past t, with t inserted into the grid.
    pub fn stop(&self, t: f64) -> Result<Path> {
        if t < -self.time_tol() || t > self.span() + self.time_tol() {
            return Err(Error::domain(format!(
                "stop time {t} outside [0, {}]",
                self.span()
            )));
        }
        let t = t.clamp(0.0, self.span());
        let (path, idx) = self.with_node_at(t);
        let frozen = path.values[idx].clone();
        let mut values = path.values;
        for row in values.iter_mut().skip(idx + 1) {
            row.clone_from(&frozen);
        }
        Ok(Path {
            grid: path.grid,
            values,
            dim: self.dim,
        })
    }

    /// Supremum of |x(s)| over [0, T]. On each segment |x|^2 is a convex
    /// quadratic, so the maximum sits at a node; node scan is exact.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| norm2(v))
            .fold(0.0, f64::max)
    }

    /// ||x||_t = ||x(. ^ t)||_T.
    pub fn seminorm(&self, t: f64) -> Result<f64> {
        Ok(self.stop(t)?.sup_norm())
    }

    /// Resample onto a (sorted) target time list by interpolation.
    pub fn resample(&self, times: &[f64]) -> Result<Path> {
        let values = times.iter().map(|&s| self.value_at(s)).collect();
        Path::new(times.to_vec(), values)
    }

    /// Path shifted by h * e on [t, T] (the node at t included), with a
    /// pre-node at t - gamma preserving the unbumped geometry so the shift
    /// acts like the jump of the vertical-derivative definition.
    pub fn bumped(&self, t: f64, delta: &[f64]) -> Result<Path> {
        if delta.len() != self.dim {
            return Err(Error::domain("bump has wrong dimension"));
        }
        let tol = self.time_tol();
        let t = t.clamp(0.0, self.span());
        let mut path = if t > tol {
            let gamma = self.span().max(1.0) * 1e-9;
            let pre = t - gamma;
            let (with_pre, pre_idx) = self.with_node_at(pre);
            // Skip the pre-node when the grid is already finer than gamma.
            if with_pre.grid.times()[pre_idx] < t {
                with_pre.with_node_at(t).0
            } else {
                self.with_node_at(t).0
            }
        } else {
            self.with_node_at(t).0
        };
        for (i, &ti) in path.grid.times.clone().iter().enumerate() {
            if ti >= t - tol {
                for (v, d) in path.values[i].iter_mut().zip(delta) {
                    *v += d;
                }
            }
        }
        Ok(path)
    }

    /// CSV with header `s,x1,...,xd`, one row per grid node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s");
        for c in 1..=self.dim {
            out.push_str(&format!(",x{c}"));
        }
        out.push('\n');
        for (t, row) in self.grid.times().iter().zip(&self.values) {
            out.push_str(&format!("{t}"));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Path> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut dim = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if lineno == 0 {
                if !line.starts_with('s') {
                    return Err(Error::Csv {
                        line: 1,
                        message: "expected header starting with 's'".into(),
                    });
                }
                dim = Some(line.split(',').count() - 1);
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let expect = dim.unwrap_or(0) + 1;
            if fields.len() != expect {
                return Err(Error::Csv {
                    line: lineno + 1,
                    message: format!("expected {expect} fields, got {}", fields.len()),
                });
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|e| Error::Csv {
                    line: lineno + 1,
                    message: e.to_string(),
                })
            };
            times.push(parse(fields[0])?);
            let row: Result<Vec<f64>> = fields[1..].iter().map(|s| parse(s)).collect();
            values.push(row?);
        }
        Path::new(times, values)
    }
}

/// A point (t, x) of [0,T] x C([0,T]; R^d).
#[derive(Clone, Debug)]
pub struct GaugePoint {
    pub t: f64,
    pub path: Path,
}

impl GaugePoint {
    pub fn new(t: f64, path: Path) -> Result<Self> {
        if t < 0.0 || t > path.span() + TIME_EPS * path.span().max(1.0) {
            return Err(Error::domain(format!(
                "gauge time {t} outside the path span [0, {}]",
                path.span()
            )));
        }
        Ok(GaugePoint { t, path })
    }
}

/// Union of two paths' grid times (deduplicated).
pub fn merged_times(a: &Path, b: &Path) -> Vec<f64> {
    let tol = TIME_EPS * a.span().max(b.span()).max(1.0);
    let mut times: Vec<f64> = a.times().iter().chain(b.times()).copied().collect();
    times.sort_by(|x, y| x.partial_cmp(y).unwrap());
    times.dedup_by(|x, y| (*x - *y).abs() <= tol);
    times
}

/// Sup-norm distance between two stopped paths on the merged grid. The
/// difference is piecewise linear there, so the node scan is exact.
pub fn stopped_distance(a: &GaugePoint, b: &GaugePoint) -> f64 {
    let xa = a.path.stop(a.t).expect("gauge time validated");
    let xb = b.path.stop(b.t).expect("gauge time validated");
    let times = merged_times(&xa, &xb);
    let mut sup: f64 = 0.0;
    for &s in &times {
        let va = xa.value_at(s);
        let vb = xb.value_at(s);
        let d: f64 = va
            .iter()
            .zip(&vb)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        sup = sup.max(d);
    }
    // Both stopped paths are frozen past max(t, t'), but the merged grids may
    // end at different spans; the frozen tails are covered by the last nodes.
    sup
}

/// d_infinity((t,x),(t',x')) = |t - t'| + ||x(.^t) - x'(.^t')||_T.
pub fn d_infinity(a: &GaugePoint, b: &GaugePoint) -> f64 {
    (a.t - b.t).abs() + stopped_distance(a, b)
}

/// Piecewise-linear path through 2^level + 1 prescribed dyadic node values.
pub fn polygonal_from_nodes(level: u32, nodes: &[Vec<f64>], t_max: f64) -> Result<Path> {
    let expect = (1usize << level) + 1;
    if nodes.len() != expect {
        return Err(Error::domain(format!(
            "dyadic level {level} needs {expect} nodes, got {}",
            nodes.len()
        )));
    }
    let times = (0..expect)
        .map(|j| t_max * j as f64 / (expect - 1) as f64)
        .collect();
    Path::new(times, nodes.to_vec())
}

/// sup over |r - s| <= delta of |x(r ^ t) - x(s ^ t)|.
///
/// The difference is affine in (r, s) on each product cell, so the maximum
/// over the strip is attained at cell corners or on the lines r - s = ±delta
/// through a node; scanning nodes plus node±delta evaluation points is exact
/// on the piecewise-linear class.
pub fn oscillation(path: &Path, t: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::domain("oscillation window must be positive"));
    }
    let stopped = path.stop(t)?;
    let span = stopped.span();
    let mut probes: Vec<f64> = stopped.times().to_vec();
    for &s in stopped.times() {
        for cand in [s - delta, s + delta] {
            if cand > 0.0 && cand < span {
                probes.push(cand);
            }
        }
    }
    probes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    probes.dedup_by(|x, y| (*x - *y).abs() <= TIME_EPS * span.max(1.0));
    let values: Vec<Vec<f64>> = probes.iter().map(|&s| stopped.value_at(s)).collect();
    let tol = delta * 1e-12 + TIME_EPS;
    let mut sup: f64 = 0.0;
    for i in 0..probes.len() {
        for j in (i + 1)..probes.len() {
            if probes[j] - probes[i] > delta + tol {
                break;
            }
            let d: f64 = values[i]
                .iter()
                .zip(&values[j])
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            sup = sup.max(d);
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeqRng;

    fn line_path() -> Path {
        // x(s) = s on [0, 1].
        Path::from_fn(vec![0.0, 0.25, 0.5, 0.75, 1.0], |s| vec![s]).unwrap()
    }

    #[test]
    fn sup_norm_examples() {
        let c = Path::constant(2, 1.0, &[2.0, -1.0]).unwrap();
        assert!((c.sup_norm() - 5.0_f64.sqrt()).abs() < 1e-15);
        let z = Path::constant(1, 1.0, &[0.0]).unwrap();
        assert_eq!(z.sup_norm(), 0.0);
        assert!((line_path().sup_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn seminorm_examples() {
        let p = line_path();
        assert!((p.seminorm(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((p.seminorm(1.0).unwrap() - p.sup_norm()).abs() < 1e-15);
        let q = Path::from_fn(vec![0.0, 1.0], |s| vec![1.0 - s]).unwrap();
        assert!((q.seminorm(0.3).unwrap() - 1.0).abs() < 1e-15);
        assert!(p.seminorm(1.5).is_err());
        assert!(p.seminorm(-0.1).is_err());
    }

    #[test]
    fn stop_examples() {
        let p = line_path();
        let s = p.stop(0.5).unwrap();
        for &q in &[0.1, 0.5, 0.7, 1.0] {
            assert!((s.value_at(q)[0] - q.min(0.5)).abs() < 1e-15);
        }
        let unchanged = p.stop(1.0).unwrap();
        assert!((unchanged.value_at(0.8)[0] - 0.8).abs() < 1e-15);
        let frozen = p.stop(0.0).unwrap();
        assert_eq!(frozen.value_at(0.9)[0], 0.0);
    }

    #[test]
    fn stop_composes_as_min() {
        let mut rng = SeqRng::new(11);
        for _ in 0..50 {
            let times = vec![0.0, 0.2, 0.5, 0.8, 1.0];
            let p = Path::from_fn(times, |_| vec![rng.next_range(-1.0, 1.0)]).unwrap();
            let (a, b) = (rng.next_uniform(), rng.next_uniform());
            let lhs = p.stop(a).unwrap().stop(b).unwrap();
            let rhs = p.stop(a.min(b)).unwrap();
            for &q in &[0.0, 0.1, 0.3, 0.6, 0.9, 1.0] {
                assert!((lhs.value_at(q)[0] - rhs.value_at(q)[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn d_infinity_examples() {
        let p = line_path();
        let a = GaugePoint::new(0.4, p.clone()).unwrap();
        assert_eq!(d_infinity(&a, &a), 0.0);

        let shifted = Path::from_fn(vec![0.0, 0.25, 0.5, 0.75, 1.0], |s| vec![s + 0.3]).unwrap();
        let b = GaugePoint::new(0.4, shifted).unwrap();
        assert!((d_infinity(&a, &b) - 0.3).abs() < 1e-15);

        let z1 = GaugePoint::new(0.2, Path::constant(1, 1.0, &[0.0]).unwrap()).unwrap();
        let z2 = GaugePoint::new(0.7, Path::constant(1, 1.0, &[0.0]).unwrap()).unwrap();
        assert!((d_infinity(&z1, &z2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn polygonal_examples() {
        let tent = polygonal_from_nodes(1, &[vec![0.0], vec![1.0], vec![0.0]], 1.0).unwrap();
        assert!((tent.value_at(0.5)[0] - 1.0).abs() < 1e-15);
        assert!((tent.value_at(0.25)[0] - 0.5).abs() < 1e-15);

        let zeros = polygonal_from_nodes(2, &vec![vec![0.0]; 5], 1.0).unwrap();
        assert_eq!(zeros.sup_norm(), 0.0);

        // Sampling a polygonal at its own dyadic nodes reproduces it.
        let p = line_path();
        let nodes: Vec<Vec<f64>> = (0..=4).map(|j| p.value_at(j as f64 / 4.0)).collect();
        let q = polygonal_from_nodes(2, &nodes, 1.0).unwrap();
        for &s in &[0.0, 0.1, 0.33, 0.77, 1.0] {
            assert!((p.value_at(s)[0] - q.value_at(s)[0]).abs() < 1e-14);
        }

        assert!(polygonal_from_nodes(2, &vec![vec![0.0]; 4], 1.0).is_err());
    }

    #[test]
    fn oscillation_examples() {
        let p = line_path();
        assert!((oscillation(&p, 1.0, 0.1).unwrap() - 0.1).abs() < 1e-14);
        let c = Path::constant(1, 1.0, &[3.0]).unwrap();
        assert_eq!(oscillation(&c, 1.0, 0.25).unwrap(), 0.0);
        // Frozen from the brute-force node-pair oracle below.
        let tent = polygonal_from_nodes(1, &[vec![0.0], vec![1.0], vec![0.0]], 1.0).unwrap();
        assert!((oscillation(&tent, 1.0, 0.5).unwrap() - 1.0).abs() < 1e-14);
    }

    /// Independent oracle: dense brute force over sampled time pairs.
    fn oscillation_oracle(path: &Path, t: f64, delta: f64) -> f64 {
        let stopped = path.stop(t).unwrap();
        let span = stopped.span();
        let n = 2000;
        let mut sup: f64 = 0.0;
        for i in 0..=n {
            let r = span * i as f64 / n as f64;
            let max_j = (((r + delta) / span * n as f64).ceil() as usize).min(n);
            for j in i..=max_j {
                let s = span * j as f64 / n as f64;
                if s - r > delta + 1e-12 {
                    break;
                }
                let d: f64 = stopped
                    .value_at(r)
                    .iter()
                    .zip(&stopped.value_at(s))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                sup = sup.max(d);
            }
        }
        sup
    }

    #[test]
    fn oscillation_matches_brute_force() {
        let mut rng = SeqRng::new(5);
        for _ in 0..10 {
            let times = vec![0.0, 0.13, 0.4, 0.55, 0.81, 1.0];
            let p = Path::from_fn(times, |_| {
                vec![rng.next_range(-1.0, 1.0), rng.next_range(-1.0, 1.0)]
            })
            .unwrap();
            let t = rng.next_range(0.3, 1.0);
            let delta = rng.next_range(0.05, 0.4);
            let exact = oscillation(&p, t, delta).unwrap();
            let brute = oscillation_oracle(&p, t, delta);
            // The dense scan undershoots by at most slope * grid spacing.
            assert!(
                exact >= brute - 1e-9 && exact <= brute + 2e-2,
                "exact {exact} vs brute {brute}"
            );
        }
    }

    #[test]
    fn bump_shifts_from_t_onward() {
        let p = line_path();
        let b = p.bumped(0.5, &[2.0]).unwrap();
        assert!((b.value_at(0.5)[0] - 2.5).abs() < 1e-12);
        assert!((b.value_at(1.0)[0] - 3.0).abs() < 1e-12);
        // Just before the bump the path is unchanged.
        assert!((b.value_at(0.4999999)[0] - 0.4999999).abs() < 1e-6);
        assert!((b.value_at(0.25)[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let p = Path::from_fn(vec![0.0, 0.5, 1.0], |s| vec![s, -s]).unwrap();
        let q = Path::from_csv(&p.to_csv()).unwrap();
        assert_eq!(p.times(), q.times());
        assert_eq!(p.values(), q.values());
        assert!(Path::from_csv("nonsense\n1,2\n").is_err());
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let text = "s,x1\n0,0\n0.5,1,2\n";
        match Path::from_csv(text) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected csv error, got {other:?}"),
        }
    }
}
