//! Counting in Frobenius-norm balls of SL(d, Z).

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::IntMatrix;
use crate::linalg::ols;
use crate::spectral::{classify_flags, ExclusionReason};

/// Default cap on the number of cells in the entry box.
pub const DEFAULT_BUDGET: u128 = 200_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Sampled,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exhaustive => "exhaustive",
            Mode::Sampled => "sampled",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "sampled" => Ok(Mode::Sampled),
            _ => Err(Error::InvalidInput(format!("unknown mode {s:?}"))),
        }
    }
}

/// Counts for one threshold. In sampled mode the counts refer to the sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub count_ball: u64,
    pub count_excluded: u64,
    pub counts_by_reason: BTreeMap<String, u64>,
    pub undecided: u64,
    pub mode: Mode,
    pub sample_size: Option<usize>,
}

impl ScanRow {
    fn empty(t: f64, mode: Mode, sample_size: Option<usize>) -> Self {
        ScanRow {
            t,
            count_ball: 0,
            count_excluded: 0,
            counts_by_reason: ExclusionReason::ALL.iter().map(|r| (r.name().to_string(), 0)).collect(),
            undecided: 0,
            mode,
            sample_size,
        }
    }

    pub fn excluded_fraction(&self) -> f64 {
        if self.count_ball == 0 {
            0.0
        } else {
            self.count_excluded as f64 / self.count_ball as f64
        }
    }

    pub fn reason(&self, r: ExclusionReason) -> u64 {
        self.counts_by_reason.get(r.name()).copied().unwrap_or(0)
    }
}

/// Largest integer n with n ≤ T², tolerant of T = √k computed in floating point.
pub fn norm_sq_limit(t: f64) -> i64 {
    if t <= 0.0 {
        return -1;
    }
    (t * t * (1.0 + 4.0 * f64::EPSILON)).floor() as i64
}

fn det_i128(a: &[i128], n: usize) -> i128 {
    // Bareiss; exact for the small entries seen here
    let mut m = a.to_vec();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k * n + k] == 0 {
            match (k + 1..n).find(|&r| m[r * n + k] != 0) {
                Some(r) => {
                    for c in 0..n {
                        m.swap(k * n + c, r * n + c);
                    }
                    sign = -sign;
                }
                None => return 0,
            }
        }
        let p = m[k * n + k];
        for i in k + 1..n {
            for j in k + 1..n {
                m[i * n + j] = (m[i * n + j] * p - m[i * n + k] * m[k * n + j]) / prev;
            }
        }
        prev = p;
    }
    sign * m[n * n - 1]
}

struct Walker<'a, F: FnMut(&[i64], i64)> {
    d: usize,
    m: i64,
    lim: i64,
    entries: Vec<i64>,
    f: &'a mut F,
}

impl<F: FnMut(&[i64], i64)> Walker<'_, F> {
    fn go(&mut self, pos: usize, used: i64) {
        let n = self.d * self.d;
        if pos == n - 1 {
            self.last(used);
            return;
        }
        let room = self.lim - used;
        let r = (room as f64).sqrt().floor() as i64;
        let r = r.min(self.m);
        for x in -r..=r {
            if x * x > room {
                continue;
            }
            self.entries[pos] = x;
            self.go(pos + 1, used + x * x);
        }
    }

    fn last(&mut self, used: i64) {
        let n = self.d * self.d;
        let room = self.lim - used;
        let mut a: Vec<i128> = self.entries.iter().map(|&x| x as i128).collect();
        a[n - 1] = 0;
        let rest = det_i128(&a, self.d);
        a[n - 1] = 1;
        let cof = det_i128(&a, self.d) - rest;
        let r = ((room as f64).sqrt().floor() as i64).min(self.m);
        if cof != 0 {
            let num = 1 - rest;
            if num % cof == 0 {
                let x = num / cof;
                if x.abs() <= r as i128 && (x * x) as i64 <= room {
                    self.entries[n - 1] = x as i64;
                    (self.f)(&self.entries, used + (x * x) as i64);
                }
            }
        } else if rest == 1 {
            for x in -r..=r {
                if x * x <= room {
                    self.entries[n - 1] = x;
                    (self.f)(&self.entries, used + x * x);
                }
            }
        }
    }
}

fn check_budget(d: usize, t: f64, budget: u128) -> Result<i64> {
    if d < 2 {
        return Err(Error::InvalidInput("dimension must be at least 2".into()));
    }
    if !t.is_finite() {
        return Err(Error::InvalidInput(format!("threshold {t} is not finite")));
    }
    let m = t.max(0.0).floor() as i64;
    let side = (2 * m + 1) as u128;
    let mut cells: u128 = 1;
    for _ in 0..d * d - 1 {
        cells = cells.saturating_mul(side);
    }
    if cells > budget {
        return Err(Error::BudgetExceeded(format!("entry box of {cells} cells for d={d}, T={t} exceeds budget {budget}")));
    }
    Ok(m)
}

/// Visit every A ∈ SL(d, Z) with ‖A‖_F ≤ T in lexicographic order, passing row-major
/// entries and ‖A‖_F². `first` restricts the (0, 0) entry.
pub fn for_each_in_ball<F: FnMut(&[i64], i64)>(d: usize, t: f64, budget: u128, first: Option<i64>, mut f: F) -> Result<()> {
    let m = check_budget(d, t, budget)?;
    let lim = norm_sq_limit(t);
    if lim < d as i64 {
        return Ok(());
    }
    let mut w = Walker { d, m, lim, entries: vec![0; d * d], f: &mut f };
    match first {
        None => w.go(0, 0),
        Some(x) => {
            if x.abs() <= m && x * x <= lim {
                w.entries[0] = x;
                w.go(1, x * x);
            }
        }
    }
    Ok(())
}

pub fn enumerate_ball(d: usize, t: f64) -> Result<Vec<IntMatrix>> {
    enumerate_ball_with(d, t, DEFAULT_BUDGET)
}

pub fn enumerate_ball_with(d: usize, t: f64, budget: u128) -> Result<Vec<IntMatrix>> {
    let mut out = Vec::new();
    for_each_in_ball(d, t, budget, None, |e, _| out.push(from_flat(d, e)))?;
    Ok(out)
}

fn from_flat(d: usize, e: &[i64]) -> IntMatrix {
    let rows: Vec<&[i64]> = e.chunks(d).collect();
    IntMatrix::from_i64_rows(&rows).expect("square")
}

#[derive(Clone, Copy, Debug)]
pub struct SampleOptions {
    /// Words have uniformly random length in 1..=max_word.
    pub max_word: usize,
    /// Minimum accepted fraction of proposed generator steps.
    pub floor: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { max_word: 32, floor: 0.01 }
    }
}

/// n matrices of the ball from random words in the elementary generators I ± E_ij.
/// Steps leaving the ball are rejected. Not uniform.
pub fn sample_ball(d: usize, t: f64, n: usize, seed: u64) -> Result<Vec<IntMatrix>> {
    sample_ball_with(d, t, n, seed, SampleOptions::default())
}

pub fn sample_ball_with(d: usize, t: f64, n: usize, seed: u64, opts: SampleOptions) -> Result<Vec<IntMatrix>> {
    if d < 2 {
        return Err(Error::InvalidInput("dimension must be at least 2".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let lim = norm_sq_limit(t);
    if lim < d as i64 {
        return Err(Error::RejectionStarved { rate: 0.0, floor: opts.floor });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let (mut proposed, mut accepted) = (0u64, 0u64);
    let mut row = vec![0i64; d];
    for _ in 0..n {
        let mut a = vec![0i64; d * d];
        for i in 0..d {
            a[i * d + i] = 1;
        }
        let mut norm: i64 = d as i64;
        let len = rng.gen_range(1..=opts.max_word.max(1));
        for _ in 0..len {
            let i = rng.gen_range(0..d);
            let mut j = rng.gen_range(0..d - 1);
            if j >= i {
                j += 1;
            }
            let s: i64 = if rng.gen::<bool>() { 1 } else { -1 };
            let mut next = norm;
            for c in 0..d {
                row[c] = a[i * d + c] + s * a[j * d + c];
                next += row[c] * row[c] - a[i * d + c] * a[i * d + c];
            }
            proposed += 1;
            if next <= lim {
                a[i * d..(i + 1) * d].copy_from_slice(&row);
                norm = next;
                accepted += 1;
            }
        }
        if proposed >= 1000 {
            let rate = accepted as f64 / proposed as f64;
            if rate < opts.floor {
                return Err(Error::RejectionStarved { rate, floor: opts.floor });
            }
        }
        out.push(from_flat(d, &a));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub mode: Mode,
    pub budget: u128,
    pub sample_size: usize,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { mode: Mode::Exhaustive, budget: DEFAULT_BUDGET, sample_size: 1000, seed: 0 }
    }
}

#[derive(Clone, Debug, Default)]
struct Tally {
    ball: u64,
    excluded: u64,
    reasons: [u64; 5],
    undecided: u64,
}

impl Tally {
    fn add(&mut self, o: &Tally) {
        self.ball += o.ball;
        self.excluded += o.excluded;
        for k in 0..5 {
            self.reasons[k] += o.reasons[k];
        }
        self.undecided += o.undecided;
    }

    fn record(&mut self, m: &IntMatrix) -> Result<()> {
        self.ball += 1;
        match classify_flags(m) {
            Ok(f) => {
                if !f.satisfies_theorem {
                    self.excluded += 1;
                }
                for r in f.exclusion_reasons {
                    let k = ExclusionReason::ALL.iter().position(|&x| x == r).expect("known reason");
                    self.reasons[k] += 1;
                }
                Ok(())
            }
            Err(e) if e.is_undecided() => {
                self.undecided += 1;
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    fn into_row(self, t: f64, mode: Mode, sample_size: Option<usize>) -> ScanRow {
        let mut row = ScanRow::empty(t, mode, sample_size);
        row.count_ball = self.ball;
        row.count_excluded = self.excluded;
        for (k, r) in ExclusionReason::ALL.iter().enumerate() {
            row.counts_by_reason.insert(r.name().to_string(), self.reasons[k]);
        }
        row.undecided = self.undecided;
        row
    }
}

/// Per-threshold counts of the ball and of matrices failing the theorem's hypotheses.
pub fn scan(d: usize, t_list: &[f64], opts: &ScanOptions) -> Result<Vec<ScanRow>> {
    if t_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("T list must be strictly increasing".into()));
    }
    let Some(&tmax) = t_list.last() else {
        return Ok(Vec::new());
    };
    match opts.mode {
        Mode::Exhaustive => {
            let m = check_budget(d, tmax, opts.budget)?;
            let lims: Vec<i64> = t_list.iter().map(|&t| norm_sq_limit(t)).collect();
            let parts: Vec<Result<Vec<Tally>>> = (-m..=m)
                .into_par_iter()
                .map(|first| {
                    let mut tallies = vec![Tally::default(); t_list.len()];
                    let mut err = None;
                    for_each_in_ball(d, tmax, opts.budget, Some(first), |e, n2| {
                        if err.is_some() {
                            return;
                        }
                        let Some(k0) = lims.iter().position(|&l| n2 <= l) else { return };
                        let mut one = Tally::default();
                        if let Err(e) = one.record(&from_flat(d, e)) {
                            err = Some(e);
                            return;
                        }
                        for t in &mut tallies[k0..] {
                            t.add(&one);
                        }
                    })?;
                    match err {
                        Some(e) => Err(e),
                        None => Ok(tallies),
                    }
                })
                .collect();
            let mut total = vec![Tally::default(); t_list.len()];
            for p in parts {
                for (acc, t) in total.iter_mut().zip(p?) {
                    acc.add(&t);
                }
            }
            Ok(total.into_iter().zip(t_list).map(|(tl, &t)| tl.into_row(t, Mode::Exhaustive, None)).collect())
        }
        Mode::Sampled => t_list
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                let sample = sample_ball(d, t, opts.sample_size, opts.seed.wrapping_add(k as u64))?;
                let tallies: Vec<Result<Tally>> = sample
                    .par_iter()
                    .map(|m| {
                        let mut one = Tally::default();
                        one.record(m).map(|_| one)
                    })
                    .collect();
                let mut acc = Tally::default();
                for x in tallies {
                    acc.add(&x?);
                }
                Ok(acc.into_row(t, Mode::Sampled, Some(opts.sample_size)))
            })
            .collect(),
    }
}

/// CSV with one column per exclusion reason.
pub fn write_csv<W: Write>(rows: &[ScanRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["T".to_string(), "count_ball".into(), "count_excluded".into()];
    header.extend(ExclusionReason::ALL.iter().map(|r| format!("reason:{}", r.name())));
    header.extend(["undecided".into(), "mode".into(), "sample_size".into()]);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![r.t.to_string(), r.count_ball.to_string(), r.count_excluded.to_string()];
        rec.extend(ExclusionReason::ALL.iter().map(|&x| r.reason(x).to_string()));
        rec.push(r.undecided.to_string());
        rec.push(r.mode.name().to_string());
        rec.push(r.sample_size.map(|s| s.to_string()).unwrap_or_default());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    Ball,
    Excluded,
    Reason(ExclusionReason),
}

impl std::str::FromStr for Column {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "count_ball" | "ball" => Ok(Column::Ball),
            "count_excluded" | "excluded" => Ok(Column::Excluded),
            _ => {
                let name = s.strip_prefix("reason:").unwrap_or(s);
                ExclusionReason::ALL
                    .iter()
                    .find(|r| r.name() == name)
                    .map(|&r| Column::Reason(r))
                    .ok_or_else(|| Error::InvalidInput(format!("unknown column {s:?}")))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

/// Least-squares slope of log(count) against log(T).
pub fn fit_exponent(rows: &[ScanRow], column: Column) -> Result<Fit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let c = match column {
                Column::Ball => r.count_ball,
                Column::Excluded => r.count_excluded,
                Column::Reason(x) => r.reason(x),
            };
            (r.t, c)
        })
        .filter(|&(t, c)| t > 0.0 && c > 0)
        .map(|(t, c)| (t.ln(), (c as f64).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} rows with positive counts; need 3", pts.len())));
    }
    if pts.iter().all(|p| p.1 == pts[0].1) {
        return Err(Error::DegenerateFit("all counts equal".into()));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (slope, stderr, intercept) = ols(&x, &y).ok_or_else(|| Error::DegenerateFit("repeated thresholds".into()))?;
    Ok(Fit { slope, stderr, intercept })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_sl2(t: i64) -> Vec<[i64; 4]> {
        let mut v = Vec::new();
        for a in -t..=t {
            for b in -t..=t {
                for c in -t..=t {
                    for d in -t..=t {
                        if a * d - b * c == 1 && a * a + b * b + c * c + d * d <= t * t {
                            v.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        v
    }

    #[test]
    fn small_balls() {
        assert!(enumerate_ball(2, 1.0).unwrap().is_empty());
        // ±I, two rotations, eight ±unipotents and eight elliptic matrices of trace ±1
        let b2 = enumerate_ball(2, 2.0).unwrap();
        assert_eq!(b2.len(), 20);
        let flat: Vec<[i64; 4]> = b2
            .iter()
            .map(|m| {
                let r = m.to_i64_rows().unwrap();
                [r[0][0], r[0][1], r[1][0], r[1][1]]
            })
            .collect();
        assert_eq!(flat, brute_force_sl2(2));
        let cat = crate::exact::cat_map();
        assert!(enumerate_ball(2, 3.0).unwrap().contains(&cat));
        assert!(!enumerate_ball(2, 2.6).unwrap().contains(&cat));
        assert!(enumerate_ball(2, 7f64.sqrt()).unwrap().contains(&cat));
    }

    #[test]
    fn sl3_matches_determinant_filter() {
        let ball = enumerate_ball(3, 2.0).unwrap();
        assert!(ball.iter().all(|m| m.det() == 1.into() && m.frobenius_sq() <= 4.into()));
        assert!(ball.contains(&IntMatrix::identity(3)));
        for m in &ball {
            let it = m.inverse_unimodular().unwrap().transpose();
            if it.frobenius_sq() <= 4.into() {
                assert!(ball.contains(&it));
            }
        }
        assert!(matches!(enumerate_ball_with(3, 40.0, 1000), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn scan_at_two() {
        let rows = scan(2, &[2.0], &ScanOptions::default()).unwrap();
        assert_eq!(rows[0].count_ball, 20);
        assert_eq!(rows[0].count_excluded, 20);
        assert_eq!(rows[0].reason(ExclusionReason::NonAnosovComplexPair), 10);
        assert_eq!(rows[0].reason(ExclusionReason::Reducible), 10);
    }

    #[test]
    fn samples_lie_in_ball() {
        let s = sample_ball(3, 6.0, 200, 7).unwrap();
        assert_eq!(s.len(), 200);
        assert!(s.iter().all(|m| m.det() == 1.into() && m.frobenius_sq() <= 36.into()));
        assert_eq!(s, sample_ball(3, 6.0, 200, 7).unwrap());
        assert!(sample_ball(3, 6.0, 0, 7).unwrap().is_empty());
        assert!(matches!(sample_ball(3, 1.0, 5, 7), Err(Error::RejectionStarved { .. })));
    }

    #[test]
    fn exact_power_law_fit() {
        let rows: Vec<ScanRow> = [2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&t| {
                let mut r = ScanRow::empty(t, Mode::Exhaustive, None);
                r.count_ball = (7.0 * t * t) as u64;
                r
            })
            .collect();
        let f = fit_exponent(&rows, Column::Ball).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(matches!(fit_exponent(&rows, Column::Excluded), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn csv_header() {
        let rows = scan(2, &[2.0, 3.0], &ScanOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("T,count_ball,count_excluded,reason:reducible,"));
        assert!(first.ends_with("undecided,mode,sample_size"));
        assert!(text.lines().nth(1).unwrap().starts_with("2,20,20,10,10,10,"));
    }
}
