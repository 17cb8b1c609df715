//! Descriptive statistics and signed-rank tests on giving data in the
//! canonical CSV layout.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::experiment::{Role, Treatment, JOINT_ACCOUNT};
use crate::simlab::{GivingRecord, CSV_HEADER};

/// Loaded giving records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub records: Vec<GivingRecord>,
}

/// Subjects are identified by session and subject id together.
pub type SubjectKey = (u32, u32);

impl Dataset {
    pub fn new(records: Vec<GivingRecord>) -> Self {
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Only the decisions that were paid out.
    pub fn implemented_only(&self) -> Dataset {
        Dataset::new(self.records.iter().filter(|r| r.implemented).cloned().collect())
    }

    pub fn cell(&self, treatment: Treatment, role: Role) -> impl Iterator<Item = &GivingRecord> {
        self.records
            .iter()
            .filter(move |r| r.treatment == treatment && r.role == role)
    }
}

fn schema(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => schema(path, 1, format!("{other:?}")),
        })?;

    let headers = reader.headers().map_err(|e| schema(path, 1, e.to_string()))?.clone();
    let mut column = HashMap::new();
    for name in CSV_HEADER.split(',') {
        let index = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_owned(),
            })?;
        column.insert(name, index);
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            schema(path, line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |name: &str| row.get(column[name]).unwrap_or("").trim();
        let parse_num = |name: &str| -> Result<f64> {
            field(name)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| schema(path, line, format!("column `{name}`: `{}` is not a number", field(name))))
        };
        let parse_id = |name: &str| -> Result<u32> {
            field(name)
                .parse::<u32>()
                .map_err(|_| schema(path, line, format!("column `{name}`: `{}` is not an id", field(name))))
        };

        let role: Role = field("role")
            .parse()
            .map_err(|e: Error| schema(path, line, e.to_string()))?;
        let treatment: Treatment = field("treatment")
            .parse()
            .map_err(|e: Error| schema(path, line, e.to_string()))?;
        let period_index = field("period_index")
            .parse::<u8>()
            .ok()
            .filter(|p| (1..=5).contains(p))
            .ok_or_else(|| schema(path, line, format!("period_index `{}` outside 1..5", field("period_index"))))?;
        let giving = parse_num("giving")?;
        if !(0.0..=JOINT_ACCOUNT).contains(&giving) {
            return Err(schema(path, line, format!("giving {giving} outside [0, {JOINT_ACCOUNT}]")));
        }
        let implemented = match field("implemented") {
            "0" => false,
            "1" => true,
            other => return Err(schema(path, line, format!("implemented must be 0 or 1, got `{other}`"))),
        };
        records.push(GivingRecord {
            session_id: parse_id("session_id")?,
            subject_id: parse_id("subject_id")?,
            pair_id: parse_id("pair_id")?,
            role,
            period_index,
            treatment,
            wage1: parse_num("wage1")?,
            wage2: parse_num("wage2")?,
            giving,
            implemented,
        });
    }
    Ok(Dataset::new(records))
}

/// Minimum giving in the stable treatment for a subject to count as social.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocialFilter {
    cutoff: f64,
}

impl SocialFilter {
    pub fn new(cutoff: f64) -> Result<Self> {
        // Cutoffs above the pot are accepted and keep nobody.
        if !(cutoff.is_finite() && cutoff >= 0.0) {
            return Err(Error::invalid("cutoff", format!("must be >= 0, got {cutoff}")));
        }
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }
}

/// Keeps every record of subjects whose stable-treatment giving reaches the cutoff.
pub fn filter_social(data: &Dataset, filter: SocialFilter) -> Result<Dataset> {
    let mut stable: BTreeMap<SubjectKey, Vec<f64>> = BTreeMap::new();
    for r in &data.records {
        let entry = stable.entry((r.session_id, r.subject_id)).or_default();
        if r.treatment == Treatment::Stable {
            entry.push(r.giving);
        }
    }
    let mut keep = BTreeMap::new();
    for (&(session_id, subject_id), givings) in &stable {
        if givings.len() != 1 {
            return Err(Error::MissingStable {
                session_id,
                subject_id,
                count: givings.len(),
            });
        }
        keep.insert((session_id, subject_id), givings[0] >= filter.cutoff);
    }
    Ok(Dataset::new(
        data.records
            .iter()
            .filter(|r| keep[&(r.session_id, r.subject_id)])
            .cloned()
            .collect(),
    ))
}

/// Mean, sample standard deviation (`n - 1` denominator; 0 when `n == 1`) and count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl Moments {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, sd, n })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryCell {
    pub treatment: Treatment,
    pub role: Role,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub cells: Vec<SummaryCell>,
    pub by_role: Vec<(Role, Moments)>,
    pub overall: Moments,
    /// Distinct subjects in the data.
    pub subjects: usize,
}

/// Row order of the summary table.
pub const SUMMARY_ORDER: [Treatment; 5] = [
    Treatment::Stable,
    Treatment::IntraDecrease,
    Treatment::CatchingUp,
    Treatment::IntraInterChange,
    Treatment::IntraIncrease,
];

pub fn summary_by_treatment(data: &Dataset) -> Result<Summary> {
    let all: Vec<f64> = data.records.iter().map(|r| r.giving).collect();
    let overall = Moments::of(&all).ok_or_else(|| Error::Empty("dataset has no records".into()))?;
    let mut cells = Vec::new();
    for treatment in SUMMARY_ORDER {
        for role in Role::ALL {
            let values: Vec<f64> = data.cell(treatment, role).map(|r| r.giving).collect();
            if let Some(m) = Moments::of(&values) {
                cells.push(SummaryCell {
                    treatment,
                    role,
                    mean: m.mean,
                    sd: m.sd,
                    n: m.n,
                });
            }
        }
    }
    let by_role = Role::ALL
        .into_iter()
        .filter_map(|role| {
            let values: Vec<f64> = data.records.iter().filter(|r| r.role == role).map(|r| r.giving).collect();
            Moments::of(&values).map(|m| (role, m))
        })
        .collect();
    let subjects = data
        .records
        .iter()
        .map(|r| (r.session_id, r.subject_id))
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    Ok(Summary {
        cells,
        by_role,
        overall,
        subjects,
    })
}

/// Share of decisions that give exactly nothing.
pub fn censoring_rate(data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("dataset has no records".into()));
    }
    let zeros = data.records.iter().filter(|r| r.giving == 0.0).count();
    Ok(zeros as f64 / data.len() as f64)
}

/// Support points of the right-continuous empirical CDF of giving in one cell.
pub fn cdf_points(data: &Dataset, treatment: Treatment, role: Role) -> Result<Vec<(f64, f64)>> {
    let mut values: Vec<f64> = data.cell(treatment, role).map(|r| r.giving).collect();
    if values.is_empty() {
        return Err(Error::Empty(format!("no records for {treatment}/{role}")));
    }
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match points.last_mut() {
            Some(last) if last.0 == v => last.1 = frac,
            _ => points.push((v, frac)),
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    TwoSided,
    /// First sample tends to be larger.
    Greater,
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMethod {
    Exact,
    NormalApprox,
}

impl TestMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestMethod::Exact => "exact",
            TestMethod::NormalApprox => "normal-approx",
        }
    }
}

/// Conventions for the signed-rank test. Zero differences are always dropped
/// before ranking and tied magnitudes always share their average rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonOptions {
    pub alternative: Alternative,
    /// Largest effective sample handled by exact enumeration.
    pub exact_max_n: usize,
    /// Subtract tie terms from the variance of the normal approximation.
    pub tie_correction: bool,
    pub continuity_correction: bool,
}

impl Default for WilcoxonOptions {
    fn default() -> Self {
        Self {
            alternative: Alternative::TwoSided,
            exact_max_n: 25,
            tie_correction: true,
            continuity_correction: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    pub n_effective: usize,
    pub w_plus: f64,
    pub p_value: f64,
    pub method: TestMethod,
}

/// Average ranks (1-based) of `values`, which need not be sorted.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Null distribution of the positive rank sum: entry `k` is the probability
/// that twice the sum equals `k`. Doubling keeps average ranks integral.
fn signed_rank_null(doubled_ranks: &[usize]) -> Vec<f64> {
    let total: usize = doubled_ranks.iter().sum();
    let mut dist = vec![0.0; total + 1];
    dist[0] = 1.0;
    let mut reach = 0;
    for &r in doubled_ranks {
        reach += r;
        for k in (r..=reach).rev() {
            dist[k] = 0.5 * (dist[k] + dist[k - r]);
        }
        for v in dist.iter_mut().take(r.min(reach + 1)) {
            *v *= 0.5;
        }
    }
    dist
}

/// Wilcoxon signed-rank test on paired samples, testing `x - y`.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64], options: WilcoxonOptions) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::invalid("y", format!("paired samples differ in length ({} vs {})", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::Empty("paired samples are empty".into()));
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            n_effective: 0,
            w_plus: 0.0,
            p_value: 1.0,
            method: TestMethod::Exact,
        });
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();

    let (p, method) = if n <= options.exact_max_n {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let dist = signed_rank_null(&doubled);
        let k = (2.0 * w_plus).round() as usize;
        let lower: f64 = dist[..=k].iter().sum();
        let upper: f64 = dist[k..].iter().sum();
        let p = match options.alternative {
            Alternative::TwoSided => 2.0 * lower.min(upper),
            Alternative::Greater => upper,
            Alternative::Less => lower,
        };
        (p, TestMethod::Exact)
    } else {
        let mean: f64 = ranks.iter().sum::<f64>() / 2.0;
        let nf = n as f64;
        let mut var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
        if options.tie_correction {
            let mut sorted = magnitudes.clone();
            sorted.sort_by(f64::total_cmp);
            let ties: f64 = sorted
                .chunk_by(|a, b| a == b)
                .map(|g| {
                    let t = g.len() as f64;
                    t * t * t - t
                })
                .sum();
            var -= ties / 48.0;
        }
        let cc = if options.continuity_correction { 0.5 } else { 0.0 };
        let normal = Normal::standard();
        let sd = var.sqrt();
        let p = if sd == 0.0 {
            1.0
        } else {
            match options.alternative {
                Alternative::TwoSided => {
                    let z = ((w_plus - mean).abs() - cc).max(0.0) / sd;
                    2.0 * normal.sf(z)
                }
                Alternative::Greater => normal.sf((w_plus - mean - cc) / sd),
                Alternative::Less => normal.cdf((w_plus - mean + cc) / sd),
            }
        };
        (p, TestMethod::NormalApprox)
    };

    Ok(WilcoxonResult {
        n_effective: n,
        w_plus,
        p_value: p.min(1.0),
        method,
    })
}

/// Who enters a paired comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EarnerGroup {
    All,
    High,
    Low,
}

impl EarnerGroup {
    pub fn as_str(&self) -> &'static str {
        match self {
            EarnerGroup::All => "all",
            EarnerGroup::High => "high",
            EarnerGroup::Low => "low",
        }
    }
}

/// A treatment as seen by each role. Pooled rows need a different treatment
/// per role (e.g. "the other decrease" is catching-up for high earners and
/// intra-inter-change for low earners).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arm {
    pub label: &'static str,
    pub high: Treatment,
    pub low: Treatment,
}

impl Arm {
    const fn same(label: &'static str, t: Treatment) -> Self {
        Self { label, high: t, low: t }
    }

    fn for_role(&self, role: Role) -> Treatment {
        match role {
            Role::HighEarner => self.high,
            Role::LowEarner => self.low,
        }
    }
}

const STABLE: Arm = Arm::same("stable", Treatment::Stable);
const INTRA_INCREASE: Arm = Arm::same("intra-increase", Treatment::IntraIncrease);
const INTRA_DECREASE: Arm = Arm::same("intra-decrease", Treatment::IntraDecrease);
const CATCHING_UP: Arm = Arm::same("catching-up", Treatment::CatchingUp);
const INTRA_INTER_CHANGE: Arm = Arm::same("intra-inter-change", Treatment::IntraInterChange);
const OTHER_DECREASE: Arm = Arm {
    label: "other-decrease",
    high: Treatment::CatchingUp,
    low: Treatment::IntraInterChange,
};
const OTHER_NO_DECREASE: Arm = Arm {
    label: "other-no-decrease",
    high: Treatment::IntraInterChange,
    low: Treatment::CatchingUp,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedComparison {
    pub group: EarnerGroup,
    pub decreasing: Arm,
    pub baseline: Arm,
}

/// Each decreasing treatment against each non-decreasing one, pooled and per
/// role, plus the two decreases against each other within a role.
pub fn decrease_comparisons() -> Vec<PairedComparison> {
    let mut out = Vec::new();
    let mut push = |group, decreasing, baselines: &[Arm]| {
        for &baseline in baselines {
            out.push(PairedComparison {
                group,
                decreasing,
                baseline,
            });
        }
    };
    let no_decrease = [STABLE, INTRA_INCREASE, OTHER_NO_DECREASE];
    push(EarnerGroup::All, INTRA_DECREASE, &no_decrease);
    push(EarnerGroup::All, OTHER_DECREASE, &no_decrease);
    push(EarnerGroup::High, INTRA_DECREASE, &no_decrease);
    push(
        EarnerGroup::High,
        CATCHING_UP,
        &[STABLE, INTRA_INCREASE, OTHER_NO_DECREASE, INTRA_DECREASE],
    );
    push(EarnerGroup::Low, INTRA_DECREASE, &no_decrease);
    push(
        EarnerGroup::Low,
        INTRA_INTER_CHANGE,
        &[STABLE, INTRA_INCREASE, OTHER_NO_DECREASE, INTRA_DECREASE],
    );
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTest {
    pub comparison: PairedComparison,
    pub result: WilcoxonResult,
}

/// Subject-level paired samples `(decreasing, baseline)` for one comparison.
/// Subjects lacking either treatment are skipped.
pub fn paired_samples(data: &Dataset, comparison: &PairedComparison) -> (Vec<f64>, Vec<f64>) {
    let mut by_subject: BTreeMap<SubjectKey, (Role, HashMap<Treatment, f64>)> = BTreeMap::new();
    for r in &data.records {
        let include = match comparison.group {
            EarnerGroup::All => true,
            EarnerGroup::High => r.role == Role::HighEarner,
            EarnerGroup::Low => r.role == Role::LowEarner,
        };
        if include {
            by_subject
                .entry((r.session_id, r.subject_id))
                .or_insert_with(|| (r.role, HashMap::new()))
                .1
                .insert(r.treatment, r.giving);
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (role, giving) in by_subject.values() {
        let dec = giving.get(&comparison.decreasing.for_role(*role));
        let base = giving.get(&comparison.baseline.for_role(*role));
        if let (Some(&d), Some(&b)) = (dec, base) {
            xs.push(d);
            ys.push(b);
        }
    }
    (xs, ys)
}

/// Runs every comparison of [`decrease_comparisons`] that has at least one pair.
pub fn decrease_tests(data: &Dataset, options: WilcoxonOptions) -> Vec<PairedTest> {
    decrease_comparisons()
        .into_iter()
        .filter_map(|comparison| {
            let (x, y) = paired_samples(data, &comparison);
            wilcoxon_signed_rank(&x, &y, options)
                .ok()
                .map(|result| PairedTest { comparison, result })
        })
        .collect()
}
