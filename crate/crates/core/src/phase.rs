//! Phase diagrams of the 2×2 game: threshold-based prediction of the
//! equilibrium set, grid sweeps against exhaustive enumeration, and
//! reconciliation of the published closed forms.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{printed, thresholds_2x2, Candidate, GammaHat, GammaHats, SolvedThreshold, Thresholds2x2};
use crate::equilibrium::{enumerate_equilibria, EnumerateOptions};
use crate::error::{invalid, Result, ScnError};
use crate::model::{format_class_set, ClassLabel, ModelParams};

pub type ClassSet = BTreeSet<ClassLabel>;

/// Feasibility and preference tests used by the predictor. Each field can
/// be swapped for a published value to audit it.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundaries {
    pub gamma_hat: GammaHats<SolvedThreshold>,
    /// Largest γ at which each candidate retailer breaks even.
    pub feasible_below: [f64; 5],
}

impl Boundaries {
    pub fn solved(t: &Thresholds2x2) -> Self {
        Self {
            gamma_hat: t.gamma_hat,
            feasible_below: Candidate::ALL.map(|c| t.gamma_max_at_c.get(c)),
        }
    }

    fn feasible(&self, cand: Candidate, gamma: f64) -> bool {
        let k = Candidate::ALL.iter().position(|&c| c == cand).expect("listed");
        gamma <= self.feasible_below[k]
    }
}

/// Equilibrium classes implied by the thresholds: every network whose
/// retailers weakly prefer it to each unilateral alternative.
pub fn predict_from(b: &Boundaries, gamma: f64) -> ClassSet {
    let h = &b.gamma_hat;
    let mut set = ClassSet::from([ClassLabel::Empty]);
    if h.pc.a_at_most_b(gamma) && h.z2c.a_at_most_b(gamma) && b.feasible(Candidate::Cone, gamma) {
        set.insert(ClassLabel::Cone);
    }
    if h.pc.a_at_least_b(gamma) && h.pz2.a_at_least_b(gamma) && b.feasible(Candidate::Parallel, gamma) {
        set.insert(ClassLabel::Parallel);
    }
    if h.fz1.a_at_most_b(gamma)
        && h.z2c.a_at_least_b(gamma)
        && h.pz2.a_at_most_b(gamma)
        && b.feasible(Candidate::Zee1, gamma)
        && b.feasible(Candidate::Zee2, gamma)
    {
        set.insert(ClassLabel::Zee);
    }
    if h.fz1.a_at_least_b(gamma) && b.feasible(Candidate::Full, gamma) {
        set.insert(ClassLabel::Full);
    }
    set
}

/// Predicted equilibrium classes of the 2×2 game with D = 1.
pub fn predict_2x2(lambda: f64, gamma: f64, c: f64) -> Result<ClassSet> {
    let t = thresholds_2x2(lambda, c, 1.0)?;
    Ok(predict_from(&Boundaries::solved(&t), gamma))
}

/// Equilibrium classes found by exhaustive enumeration.
pub fn enumerate_2x2(lambda: f64, gamma: f64, c: f64, demand: f64) -> Result<ClassSet> {
    let p = ModelParams::new(2, 2, demand, lambda, c, gamma)?;
    Ok(enumerate_equilibria(&p, EnumerateOptions::default())?.class_set())
}

/// Placement of γ values along each grid row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GammaAxis {
    /// `count` evenly spaced values over `[lo, hi]`.
    Range { lo: f64, hi: f64 },
    /// γ_k = k·γ^max_parallel(λ)/(count + 1), k = 1..=count.
    BelowParallelMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub lambda_count: usize,
    pub gamma: GammaAxis,
    pub gamma_count: usize,
    pub c_values: Vec<f64>,
    #[serde(default = "one")]
    pub demand: f64,
    /// Cells within this many grid steps of a boundary are indeterminate.
    #[serde(default = "two")]
    pub boundary_steps: f64,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if self.lambda_count == 0 || self.gamma_count == 0 || self.c_values.is_empty() {
            return Err(invalid("grid", "empty grid"));
        }
        if !(self.lambda_lo > 0.0 && self.lambda_hi < 1.0 && self.lambda_lo <= self.lambda_hi) {
            return Err(invalid("grid", "lambda range must lie inside (0, 1)"));
        }
        if let GammaAxis::Range { lo, hi } = self.gamma {
            if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
                return Err(invalid("grid", "gamma range must satisfy 0 <= lo <= hi"));
            }
        }
        if self.c_values.iter().any(|&c| !(c.is_finite() && c >= 0.0)) {
            return Err(invalid("grid", "c values must be finite and >= 0"));
        }
        if !(self.demand.is_finite() && self.demand > 0.0) {
            return Err(invalid("grid", "demand must be > 0"));
        }
        Ok(())
    }

    fn lambda_step(&self) -> f64 {
        if self.lambda_count > 1 {
            (self.lambda_hi - self.lambda_lo) / (self.lambda_count - 1) as f64
        } else {
            0.0
        }
    }

    fn lambda_at(&self, k: isize) -> f64 {
        self.lambda_lo + self.lambda_step() * k as f64
    }

    /// γ values and their spacing on a row with parallel-feasibility bound
    /// `gamma_max_parallel`.
    fn gammas(&self, gamma_max_parallel: f64) -> (Vec<f64>, f64) {
        let n = self.gamma_count;
        match self.gamma {
            GammaAxis::Range { lo, hi } => {
                let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
                ((0..n).map(|k| lo + step * k as f64).collect(), step)
            }
            GammaAxis::BelowParallelMax => {
                let top = gamma_max_parallel.max(0.0);
                let step = top / (n + 1) as f64;
                ((1..=n).map(|k| step * k as f64).collect(), step)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub lambda: f64,
    pub gamma: f64,
    pub c: f64,
    pub predicted: ClassSet,
    pub enumerated: ClassSet,
    pub agree: bool,
    /// γ-distance to the nearest boundary curve at this λ.
    pub boundary_distance: f64,
    /// The prediction changes within the boundary tolerance box around the
    /// cell, so disagreement here is not scored.
    pub indeterminate: bool,
}

/// Boundary curves of one λ column, as values of γ.
fn boundary_values(t: &Thresholds2x2) -> Vec<f64> {
    let mut v: Vec<f64> = GammaHat::ALL.iter().map(|&w| t.gamma_hat.get(w).gamma).collect();
    v.extend(Candidate::ALL.iter().map(|&c| t.gamma_max_at_c.get(c)));
    v.retain(|x| x.is_finite());
    v
}

struct Column {
    lambda: f64,
    thresholds: Thresholds2x2,
    boundaries: Vec<f64>,
}

fn column(spec: &GridSpec, c: f64, k: isize) -> Option<Column> {
    let lambda = spec.lambda_at(k);
    let thresholds = thresholds_2x2(lambda, c, spec.demand).ok()?;
    let boundaries = boundary_values(&thresholds);
    Some(Column {
        lambda,
        thresholds,
        boundaries,
    })
}

/// Predicted and enumerated equilibrium sets over the grid, row-major in
/// (c, λ, γ).
pub fn sweep(spec: &GridSpec) -> Result<Vec<PhaseCell>> {
    sweep_with(spec, |_, b| b)
}

/// Sweep whose predictor boundaries are first passed through `adjust`,
/// for example to substitute a published threshold.
pub fn sweep_with<F>(spec: &GridSpec, adjust: F) -> Result<Vec<PhaseCell>>
where
    F: Fn(&Thresholds2x2, Boundaries) -> Boundaries + Sync,
{
    spec.validate()?;
    let reach = spec.boundary_steps.ceil().max(0.0) as isize;
    let mut cells = Vec::new();
    for &c in &spec.c_values {
        let lo = -reach;
        let hi = spec.lambda_count as isize + reach;
        let columns: Vec<Option<Column>> = (lo..hi).into_par_iter().map(|k| column(spec, c, k)).collect();
        let col = |k: isize| columns[(k - lo) as usize].as_ref();

        let adjusted: Vec<Option<Boundaries>> = columns
            .iter()
            .map(|c| {
                c.as_ref()
                    .map(|c| adjust(&c.thresholds, Boundaries::solved(&c.thresholds)))
            })
            .collect();
        let bounds = |k: isize| adjusted[(k - lo) as usize].as_ref();

        let rows: Vec<Vec<PhaseCell>> = (0..spec.lambda_count as isize)
            .into_par_iter()
            .map(|k| -> Result<Vec<PhaseCell>> {
                let here = col(k).ok_or_else(|| invalid("grid", "lambda outside (0, 1)"))?;
                let boundaries = bounds(k).expect("column exists");
                let (gammas, gstep) = spec.gammas(here.thresholds.gamma_max.parallel);
                gammas
                    .into_iter()
                    .map(|gamma| {
                        let predicted = predict_from(boundaries, gamma);
                        let enumerated = enumerate_2x2(here.lambda, gamma, c, spec.demand)?;
                        let boundary_distance = here
                            .boundaries
                            .iter()
                            .map(|b| (gamma - b).abs())
                            .fold(f64::INFINITY, f64::min);
                        // the prediction must be constant over the tolerance box
                        let indeterminate = (k - reach..=k + reach).filter_map(bounds).any(|b| {
                            (-reach..=reach).any(|s| {
                                let g = gamma + gstep * spec.boundary_steps * s as f64 / reach.max(1) as f64;
                                predict_from(b, g) != predicted
                            })
                        });
                        Ok(PhaseCell {
                            lambda: here.lambda,
                            gamma,
                            c,
                            agree: predicted == enumerated,
                            predicted,
                            enumerated,
                            boundary_distance,
                            indeterminate,
                        })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        cells.extend(rows.into_iter().flatten());
    }
    Ok(cells)
}

/// A published closed form and how many checked cells it mispredicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrintedAudit {
    pub quantity: String,
    pub checked_cells: usize,
    pub contradicted_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconcileReport {
    pub total: usize,
    pub agreeing: usize,
    pub indeterminate: usize,
    /// Disagreeing cells away from every boundary.
    pub disagreements: Vec<PhaseCell>,
    /// Disagreeing cells inside a boundary band (not failures).
    pub boundary_disagreements: usize,
    pub printed_audit: Vec<PrintedAudit>,
}

impl ReconcileReport {
    /// Published quantities contradicted by at least one cell.
    pub fn contradicted(&self) -> Vec<&str> {
        self.printed_audit
            .iter()
            .filter(|a| a.contradicted_cells > 0)
            .map(|a| a.quantity.as_str())
            .collect()
    }
}

/// Boundaries with one published closed form substituted for its solved
/// counterpart. Published thresholds assume c = 0; `None` when the
/// substitution does not apply at this cost.
fn with_printed(quantity: &str, t: &Thresholds2x2, gamma: f64, mut b: Boundaries) -> Option<Boundaries> {
    if let Some(name) = quantity.strip_prefix("gamma_hat_") {
        if t.c != 0.0 {
            return None;
        }
        let which = GammaHat::ALL.into_iter().find(|w| w.as_str() == name)?;
        let value = printed::gamma_hat(which, t.lambda);
        let slot = match which {
            GammaHat::Fz1 => &mut b.gamma_hat.fz1,
            GammaHat::Z2c => &mut b.gamma_hat.z2c,
            GammaHat::Pc => &mut b.gamma_hat.pc,
            GammaHat::Pz2 => &mut b.gamma_hat.pz2,
        };
        slot.gamma = value;
        return Some(b);
    }
    let name = quantity.strip_prefix("c_max_")?;
    let cand = Candidate::ALL.into_iter().find(|c| c.as_str() == name)?;
    let k = Candidate::ALL.iter().position(|&c| c == cand)?;
    let ok = t.c <= printed::c_max(cand, t.lambda, gamma, t.demand);
    b.feasible_below[k] = if ok { f64::INFINITY } else { f64::NEG_INFINITY };
    Some(b)
}

/// Names of the published quantities audited by [`reconcile`].
pub fn audited_quantities() -> Vec<String> {
    GammaHat::ALL
        .iter()
        .map(|w| format!("gamma_hat_{}", w.as_str()))
        .chain(Candidate::ALL.iter().map(|c| format!("c_max_{}", c.as_str())))
        .collect()
}

/// Summarises a sweep: disagreements away from boundaries, and for every
/// published threshold or cost bound the number of cells whose enumerated
/// set contradicts a prediction made with the published value.
pub fn reconcile(cells: &[PhaseCell], demand: f64) -> Result<ReconcileReport> {
    let mut thresholds: Vec<((u64, u64), Thresholds2x2)> = Vec::new();
    for cell in cells {
        let key = (cell.lambda.to_bits(), cell.c.to_bits());
        if !thresholds.iter().any(|(k, _)| *k == key) {
            thresholds.push((key, thresholds_2x2(cell.lambda, cell.c, demand)?));
        }
    }
    let lookup = |cell: &PhaseCell| -> &Thresholds2x2 {
        let key = (cell.lambda.to_bits(), cell.c.to_bits());
        &thresholds.iter().find(|(k, _)| *k == key).expect("cached").1
    };

    let printed_audit = audited_quantities()
        .into_par_iter()
        .map(|quantity| {
            let mut checked = 0;
            let mut contradicted = 0;
            for cell in cells {
                let t = lookup(cell);
                if let Some(b) = with_printed(&quantity, t, cell.gamma, Boundaries::solved(t)) {
                    checked += 1;
                    if predict_from(&b, cell.gamma) != cell.enumerated {
                        contradicted += 1;
                    }
                }
            }
            PrintedAudit {
                quantity,
                checked_cells: checked,
                contradicted_cells: contradicted,
            }
        })
        .collect();

    Ok(ReconcileReport {
        total: cells.len(),
        agreeing: cells.iter().filter(|c| c.agree).count(),
        indeterminate: cells.iter().filter(|c| c.indeterminate).count(),
        disagreements: cells.iter().filter(|c| !c.agree && !c.indeterminate).cloned().collect(),
        boundary_disagreements: cells.iter().filter(|c| !c.agree && c.indeterminate).count(),
        printed_audit,
    })
}

/// Writes cells as CSV with header `lambda,gamma,c,predicted,enumerated,agree`.
pub fn write_csv<W: Write>(cells: &[PhaseCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| ScnError::Malformed(format!("csv: {e}"));
    w.write_record(["lambda", "gamma", "c", "predicted", "enumerated", "agree"])
        .map_err(err)?;
    for cell in cells {
        w.write_record([
            format_number(cell.lambda),
            format_number(cell.gamma),
            format_number(cell.c),
            format_class_set(&cell.predicted),
            format_class_set(&cell.enumerated),
            cell.agree.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| ScnError::Malformed(format!("csv: {e}")))?;
    Ok(())
}

/// Shortest decimal form of `x` rounded to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn format_number(x: f64) -> String {
    round_sig12(x).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(s: &str) -> ClassSet {
        crate::model::parse_class_set(s).unwrap()
    }

    #[test]
    fn prediction_examples() {
        assert_eq!(predict_2x2(0.9, 0.004, 0.0).unwrap(), labels("empty+cone"));
        assert_eq!(predict_2x2(0.9, 0.010, 0.0).unwrap(), labels("empty+cone+full"));
        assert_eq!(predict_2x2(0.9, 0.05, 0.0).unwrap(), labels("empty+parallel+full"));
        assert_eq!(predict_2x2(0.9, 0.2, 0.0).unwrap(), labels("empty"));
    }

    #[test]
    fn single_cell_grid() {
        let spec = GridSpec {
            lambda_lo: 0.9,
            lambda_hi: 0.9,
            lambda_count: 1,
            gamma: GammaAxis::Range { lo: 0.05, hi: 0.05 },
            gamma_count: 1,
            c_values: vec![0.0],
            demand: 1.0,
            boundary_steps: 2.0,
        };
        let cells = sweep(&spec).unwrap();
        assert_eq!(cells.len(), 1);
        assert!(cells[0].agree);
    }

    #[test]
    fn empty_grid_rejected() {
        let spec = GridSpec {
            lambda_lo: 0.7,
            lambda_hi: 0.9,
            lambda_count: 0,
            gamma: GammaAxis::BelowParallelMax,
            gamma_count: 3,
            c_values: vec![0.0],
            demand: 1.0,
            boundary_steps: 2.0,
        };
        assert!(sweep(&spec).is_err());
    }

    #[test]
    fn csv_layout() {
        let cell = PhaseCell {
            lambda: 0.9,
            gamma: 0.01,
            c: 0.0,
            predicted: labels("empty+cone+full"),
            enumerated: labels("empty+cone+full"),
            agree: true,
            boundary_distance: 0.001,
            indeterminate: false,
        };
        let mut buf = Vec::new();
        write_csv(&[cell], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "lambda,gamma,c,predicted,enumerated,agree\n0.9,0.01,0,empty+cone+full,empty+cone+full,true\n"
        );
    }

    #[test]
    fn rounding_to_twelve_digits() {
        assert_eq!(round_sig12(0.1 + 0.2), 0.3);
        assert_eq!(format_number(0.012666666666666666), "0.0126666666667");
    }
}
