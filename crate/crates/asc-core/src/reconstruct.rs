//! Process-matrix reconstruction from exact syndrome statistics.
//!
//! The pipeline plans measurement configurations over a family of codes,
//! collects outcome probabilities (simulated here, but externally measured
//! values in the same record format work too), assembles a real linear
//! system over the process-matrix parameters, and solves it in two stages:
//! diagonals from direct measurements first, then off-diagonal real and
//! imaginary parts from preprocessed runs with the solved diagonals
//! substituted.  Parameters outside the column space are reported as
//! unresolved rather than guessed.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::ambiguity::{build_class, ErrorSet};
use crate::channel::ProcessMatrix;
use crate::codes::CatalogEntry;
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::simulate::{
    self, canonical_toggler_signs, direct_functional, logical_input_amplitudes,
    preprocessed_functional, realize_plan_record, toggler_sign_string, ChiParam, LogicalAxis,
    OutcomeRecord, PlanRecord, Preprocessing, ProbabilityFunctional, UnitarySpec,
};
use crate::stabilizer::Syndrome;

/// Singular values below this fraction of the largest are treated as zero.
const RANK_TOL: f64 = 1e-9;
/// A parameter counts as resolved when its projection onto the row space has
/// at least this squared norm.
const RESOLVED_TOL: f64 = 1e-6;
/// Angle used by the fourth input of the four-input schedule.
pub const SCHEDULE_THETA: f64 = std::f64::consts::FRAC_PI_3;

/// Which solving stage a plan item belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanStage {
    /// Direct measurement informing diagonal parameters.
    Diagonal,
    /// Preprocessed measurement informing off-diagonal parameters.
    OffDiagonal,
}

/// One planned configuration with its bookkeeping.
#[derive(Debug, Clone)]
pub struct PlanItem {
    /// Serializable description of the run.
    pub record: PlanRecord,
    /// Outcomes of this run that contribute rows to the system.  Toggled
    /// runs contribute only the outcome their sign assignment was built for.
    pub anchors: Vec<Syndrome>,
    /// Parameters this item is meant to inform.
    pub targets: Vec<ChiParam>,
    /// Solving stage.
    pub stage: PlanStage,
}

/// An ordered collection of planned configurations.
#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    m: usize,
    items: Vec<PlanItem>,
    unreachable: Vec<ChiParam>,
}

impl MeasurementPlan {
    fn new(m: usize) -> Self {
        MeasurementPlan {
            m,
            items: Vec::new(),
            unreachable: Vec::new(),
        }
    }

    /// Number of noisy qubits all items refer to.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Planned items in execution order.
    pub fn items(&self) -> &[PlanItem] {
        &self.items
    }

    /// Parameters no supplied code can reach (mutually ambiguous pairs).
    pub fn unreachable(&self) -> &[ChiParam] {
        &self.unreachable
    }

    /// Serializable records, in order, for plan files.
    pub fn records(&self) -> Vec<PlanRecord> {
        self.items.iter().map(|item| item.record.clone()).collect()
    }

    /// Append another plan's items (indices shift accordingly).
    pub fn extend(&mut self, other: MeasurementPlan) -> Result<()> {
        if other.m != self.m {
            return Err(Error::DimensionMismatch {
                left: self.m,
                right: other.m,
            });
        }
        self.items.extend(other.items);
        for param in other.unreachable {
            if !self.unreachable.contains(&param) {
                self.unreachable.push(param);
            }
        }
        Ok(())
    }
}

/// A real linear system over process-matrix parameters.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    design: DMatrix<f64>,
    observations: DVector<f64>,
    labels: Vec<ChiParam>,
    m: usize,
}

impl LinearSystem {
    /// Rows = observations, columns = parameters.
    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    /// One observed (and substitution-adjusted) probability per row.
    pub fn observations(&self) -> &DVector<f64> {
        &self.observations
    }

    /// Column labels.
    pub fn labels(&self) -> &[ChiParam] {
        &self.labels
    }

    /// Number of noisy qubits.
    pub fn m(&self) -> usize {
        self.m
    }
}

/// Outcome of solving a linear system: the best-effort process matrix plus
/// an honest split of the parameter set.
#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    chi_estimate: ProcessMatrix,
    resolved: Vec<ChiParam>,
    unresolved: Vec<ChiParam>,
    max_residual: f64,
}

impl ReconstructionReport {
    /// Best-effort estimate; unresolved parameters are left at zero.
    pub fn chi_estimate(&self) -> &ProcessMatrix {
        &self.chi_estimate
    }

    /// Parameters determined by the system (inside the row space).
    pub fn resolved(&self) -> &[ChiParam] {
        &self.resolved
    }

    /// Parameters the system cannot determine.
    pub fn unresolved(&self) -> &[ChiParam] {
        &self.unresolved
    }

    /// Largest absolute residual over rows supported on resolved parameters.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    /// Solved values keyed by parameter, for staged substitution.
    pub fn solved_values(&self) -> BTreeMap<ChiParam, f64> {
        self.resolved
            .iter()
            .map(|param| (*param, param.value_in(&self.chi_estimate)))
            .collect()
    }
}

/// All parameters of an m-qubit process matrix in canonical column order:
/// diagonals, then real parts, then imaginary parts.
pub fn full_parameter_set(m: usize) -> Vec<ChiParam> {
    let dim = 1usize << (2 * m);
    let mut params = Vec::with_capacity(dim * dim);
    for j in 0..dim {
        params.push(ChiParam::Diag(j));
    }
    for j in 0..dim {
        for k in j + 1..dim {
            params.push(ChiParam::Re(j, k));
        }
    }
    for j in 0..dim {
        for k in j + 1..dim {
            params.push(ChiParam::Im(j, k));
        }
    }
    params
}

/// All off-diagonal index pairs of the m-qubit basis.
pub fn all_offdiagonal_pairs(m: usize) -> Vec<(usize, usize)> {
    let dim = 1usize << (2 * m);
    let mut pairs = Vec::with_capacity(dim * (dim - 1) / 2);
    for j in 0..dim {
        for k in j + 1..dim {
            pairs.push((j, k));
        }
    }
    pairs
}

/// The cross-term axes a code's direct functionals can produce.
fn cross_axes(entry: &CatalogEntry) -> Result<BTreeSet<LogicalAxis>> {
    let code = entry.code();
    let coords = entry.noisy_coords();
    let errors = ErrorSet::pauli_group_on(code.n(), coords)?;
    let class = build_class(code, &errors)?;
    let mut axes = BTreeSet::new();
    for (syndrome, _) in class.sets() {
        let functional = direct_functional(code, coords, syndrome)?;
        for ((param, axis), _) in functional.terms() {
            if !matches!(param, ChiParam::Diag(_)) && *axis != LogicalAxis::Unit {
                axes.insert(*axis);
            }
        }
    }
    Ok(axes)
}

// Each named input zeroes two of the three logical axes.
fn killed_by(input: &str) -> BTreeSet<LogicalAxis> {
    match input {
        "0L" => [LogicalAxis::X, LogicalAxis::Y].into_iter().collect(),
        "+L" => [LogicalAxis::Y, LogicalAxis::Z].into_iter().collect(),
        _ => [LogicalAxis::X, LogicalAxis::Z].into_iter().collect(),
    }
}

/// Pick a named input whose logical expectations cancel every cross-term
/// axis the code's direct functionals can produce; falls back to the
/// four-input schedule when no single input works.
fn diagonal_inputs(entry: &CatalogEntry) -> Result<Vec<String>> {
    let axes = cross_axes(entry)?;
    for input in ["0L", "+L", "upL"] {
        if axes.iter().all(|axis| killed_by(input).contains(axis)) {
            return Ok(vec![input.to_string()]);
        }
    }
    Ok(vec![
        "0L".to_string(),
        "+L".to_string(),
        "upL".to_string(),
        format!("{SCHEDULE_THETA:.17}"),
    ])
}

/// Inputs for preprocessed runs: the expectation-cancelling input first,
/// then one exposing each cross-term axis the code produces.  The cancelled
/// rows isolate the constant-coefficient combinations; the exposing rows
/// bring the expectation-weighted terms back and separate parameter pairs
/// the cancelled rows only see in fixed combination.
fn offdiagonal_inputs(entry: &CatalogEntry) -> Result<Vec<String>> {
    let mut inputs = vec![diagonal_inputs(entry)?
        .into_iter()
        .next()
        .expect("diagonal_inputs returns at least one input")];
    for axis in cross_axes(entry)? {
        let exposing = match axis {
            LogicalAxis::X => "+L",
            LogicalAxis::Y => "upL",
            LogicalAxis::Z => "0L",
            LogicalAxis::Unit => continue,
        };
        if !inputs.iter().any(|input| input == exposing) {
            inputs.push(exposing.to_string());
        }
    }
    Ok(inputs)
}

/// Plan direct measurements that determine the diagonal parameters.
pub fn plan_diagonal(entries: &[CatalogEntry]) -> Result<MeasurementPlan> {
    let Some(first) = entries.first() else {
        return Err(Error::MalformedInput {
            what: "measurement plan".into(),
            reason: "at least one code is required".into(),
        });
    };
    let m = first.noisy_coords().len();
    let mut plan = MeasurementPlan::new(m);
    for entry in entries {
        if entry.noisy_coords().len() != m {
            return Err(Error::DimensionMismatch {
                left: m,
                right: entry.noisy_coords().len(),
            });
        }
        let code = entry.code();
        let coords = entry.noisy_coords();
        let errors = ErrorSet::pauli_group_on(code.n(), coords)?;
        let class = build_class(code, &errors)?;
        let anchors: Vec<Syndrome> = class.sets().iter().map(|(s, _)| s.clone()).collect();
        let mut targets = BTreeSet::new();
        for (syndrome, _) in class.sets() {
            for ((param, _), _) in direct_functional(code, coords, syndrome)?.terms() {
                if matches!(param, ChiParam::Diag(_)) {
                    targets.insert(*param);
                }
            }
        }
        for input in diagonal_inputs(entry)? {
            plan.items.push(PlanItem {
                record: PlanRecord {
                    code: entry.id().to_string(),
                    input,
                    preprocessing: "none".to_string(),
                },
                anchors: anchors.clone(),
                targets: targets.iter().copied().collect(),
                stage: PlanStage::Diagonal,
            });
        }
    }
    Ok(plan)
}

/// Plan preprocessed measurements covering the real and imaginary parts of
/// the target pairs.  Each reachable pair gets an untoggled and a toggled
/// run on every code where the pair falls in distinct ambiguous sets: a
/// single code only constrains sums over its own set structure, and the
/// complementary pairings of the other codes are what make the combined
/// system separable.  Pairs ambiguous in every code are reported
/// unreachable.
pub fn plan_offdiagonal(
    entries: &[CatalogEntry],
    pairs: &[(usize, usize)],
) -> Result<MeasurementPlan> {
    let Some(first) = entries.first() else {
        return Err(Error::MalformedInput {
            what: "measurement plan".into(),
            reason: "at least one code is required".into(),
        });
    };
    let m = first.noisy_coords().len();
    let mut plan = MeasurementPlan::new(m);
    for &(j, k) in pairs {
        if j >= k {
            return Err(Error::MalformedInput {
                what: "target pair".into(),
                reason: format!("indices must satisfy j < k, got ({j}, {k})"),
            });
        }
        let mut placed = false;
        for entry in entries {
            if entry.noisy_coords().len() != m {
                return Err(Error::DimensionMismatch {
                    left: m,
                    right: entry.noisy_coords().len(),
                });
            }
            let code = entry.code();
            let coords = entry.noisy_coords();
            let e_j = PauliOperator::from_basis_index(m, j)?.embed(code.n(), coords)?;
            let e_k = PauliOperator::from_basis_index(m, k)?.embed(code.n(), coords)?;
            if code.syndrome_of(&e_j)? == code.syndrome_of(&e_k)? {
                continue;
            }
            let errors = ErrorSet::pauli_group_on(code.n(), coords)?;
            let class = build_class(code, &errors)?;
            let spec = UnitarySpec::new(e_j, e_k)?;
            let unitary_text = format!("U:{},{}", spec.e_a(), spec.e_b());
            let all_outcomes: Vec<Syndrome> =
                class.sets().iter().map(|(s, _)| s.clone()).collect();
            let trivial = code.syndrome_of(&PauliOperator::identity(code.n())?)?;
            let trivial_signs = canonical_toggler_signs(&class, &spec, &trivial)?;
            for input in offdiagonal_inputs(entry)? {
                // Untoggled run: every outcome yields a valid functional row.
                plan.items.push(PlanItem {
                    record: PlanRecord {
                        code: entry.id().to_string(),
                        input: input.clone(),
                        preprocessing: unitary_text.clone(),
                    },
                    anchors: all_outcomes.clone(),
                    targets: vec![ChiParam::Re(j, k), ChiParam::Im(j, k)],
                    stage: PlanStage::OffDiagonal,
                });
                // Toggled run: only the anchor its signs were built for.
                plan.items.push(PlanItem {
                    record: PlanRecord {
                        code: entry.id().to_string(),
                        input,
                        preprocessing: format!(
                            "T:{};{}",
                            toggler_sign_string(&trivial_signs),
                            unitary_text
                        ),
                    },
                    anchors: vec![trivial.clone()],
                    targets: vec![ChiParam::Re(j, k), ChiParam::Im(j, k)],
                    stage: PlanStage::OffDiagonal,
                });
            }
            placed = true;
        }
        if !placed {
            plan.unreachable.push(ChiParam::Re(j, k));
            plan.unreachable.push(ChiParam::Im(j, k));
        }
    }
    Ok(plan)
}

/// Simulate every plan item exactly and return the flattened outcome
/// records (externally measured records in the same shape may be used
/// instead).
pub fn simulate_plan(plan: &MeasurementPlan, chi: &ProcessMatrix) -> Result<Vec<OutcomeRecord>> {
    let records = plan.records();
    let (outcomes, _warnings) = simulate::run_plan(&records, chi)?;
    Ok(outcomes)
}

/// The functional behind one plan item at one anchor outcome.
fn item_functional(item: &PlanItem, anchor: &Syndrome) -> Result<ProbabilityFunctional> {
    let (entry, config) = realize_plan_record(&item.record)?;
    let code = entry.code();
    let coords = entry.noisy_coords();
    match config.preprocessing() {
        Preprocessing::None => direct_functional(code, coords, anchor),
        Preprocessing::Unitary(spec) => {
            preprocessed_functional(code, coords, spec, anchor, false)
        }
        Preprocessing::Toggled { spec, .. } => {
            preprocessed_functional(code, coords, spec, anchor, true)
        }
    }
}

/// Logical expectations of a plan item's input state.
fn item_expectations(item: &PlanItem) -> Result<[f64; 3]> {
    let (entry, _) = realize_plan_record(&item.record)?;
    let code = entry.code();
    let amplitudes = logical_input_amplitudes(&item.record.input, code.k())?;
    let psi = code.encode(&amplitudes)?;
    code.logical_expectations(&psi)
}

/// Assemble the linear system for a plan from collected probabilities,
/// substituting previously solved parameter values into the observations.
pub fn assemble(
    plan: &MeasurementPlan,
    probabilities: &[OutcomeRecord],
    solved: &BTreeMap<ChiParam, f64>,
) -> Result<LinearSystem> {
    let labels = full_parameter_set(plan.m);
    let column_of: BTreeMap<ChiParam, usize> = labels
        .iter()
        .enumerate()
        .map(|(index, param)| (*param, index))
        .collect();
    let observed: BTreeMap<(usize, &str), f64> = probabilities
        .iter()
        .map(|record| ((record.plan_index, record.syndrome.as_str()), record.probability))
        .collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (index, item) in plan.items.iter().enumerate() {
        let expectations = item_expectations(item)?;
        for anchor in &item.anchors {
            let anchor_text = anchor.to_string();
            let Some(&probability) = observed.get(&(index, anchor_text.as_str())) else {
                return Err(Error::MissingProbability {
                    entry: index,
                    syndrome: anchor_text,
                });
            };
            let functional = item_functional(item, anchor)?;
            let mut row = vec![0.0; labels.len()];
            let mut value = probability;
            for (&(param, axis), &weight) in functional.terms() {
                let coefficient = weight * axis.value(&expectations);
                if coefficient == 0.0 {
                    continue;
                }
                if let Some(known) = solved.get(&param) {
                    value -= coefficient * known;
                } else {
                    row[column_of[&param]] += coefficient;
                }
            }
            rows.push(row);
            values.push(value);
        }
    }
    let design = DMatrix::from_fn(rows.len(), labels.len(), |r, c| rows[r][c]);
    let observations = DVector::from_vec(values);
    Ok(LinearSystem {
        design,
        observations,
        labels,
        m: plan.m,
    })
}

/// Solve a system by rank-revealing least squares.  Parameters whose basis
/// vectors lie outside the row space are reported unresolved; the estimate
/// leaves them at zero.
pub fn solve(system: &LinearSystem) -> Result<ReconstructionReport> {
    let labels = &system.labels;
    let columns = labels.len();
    let mut x = DVector::<f64>::zeros(columns);
    let mut resolved_mask = vec![false; columns];
    let rows = system.design.nrows();
    if rows > 0 {
        let svd = system.design.clone().svd(true, true);
        let u = svd.u.as_ref().expect("svd computed with u");
        let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
        let largest = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let threshold = largest * RANK_TOL;
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > threshold && s > 0.0)
            .count();
        // x = V_r S_r^{-1} U_r^T b
        let mut projected = DVector::<f64>::zeros(svd.singular_values.len());
        for l in 0..rank {
            let mut dot = 0.0;
            for r in 0..rows {
                dot += u[(r, l)] * system.observations[r];
            }
            projected[l] = dot / svd.singular_values[l];
        }
        for c in 0..columns {
            let mut sum = 0.0;
            let mut row_space = 0.0;
            for l in 0..rank {
                sum += v_t[(l, c)] * projected[l];
                row_space += v_t[(l, c)] * v_t[(l, c)];
            }
            x[c] = sum;
            resolved_mask[c] = (row_space - 1.0).abs() < RESOLVED_TOL;
        }
    }
    let mut resolved = Vec::new();
    let mut unresolved = Vec::new();
    for (c, param) in labels.iter().enumerate() {
        if resolved_mask[c] {
            resolved.push(*param);
        } else {
            x[c] = 0.0;
            unresolved.push(*param);
        }
    }
    // Residuals over rows supported entirely on resolved parameters.
    let mut max_residual = 0.0f64;
    if rows > 0 {
        let predicted = &system.design * &x;
        for r in 0..rows {
            let supported = (0..columns)
                .all(|c| system.design[(r, c)].abs() < 1e-14 || resolved_mask[c]);
            if supported {
                max_residual = max_residual.max((predicted[r] - system.observations[r]).abs());
            }
        }
    }
    let chi_estimate = chi_from_values(system.m, labels, &x)?;
    Ok(ReconstructionReport {
        chi_estimate,
        resolved,
        unresolved,
        max_residual,
    })
}

fn chi_from_values(m: usize, labels: &[ChiParam], x: &DVector<f64>) -> Result<ProcessMatrix> {
    let dim = 1usize << (2 * m);
    let mut chi = DMatrix::<Complex64>::zeros(dim, dim);
    for (c, param) in labels.iter().enumerate() {
        match *param {
            ChiParam::Diag(j) => chi[(j, j)] += Complex64::new(x[c], 0.0),
            ChiParam::Re(j, k) => {
                chi[(j, k)] += Complex64::new(x[c], 0.0);
                chi[(k, j)] += Complex64::new(x[c], 0.0);
            }
            ChiParam::Im(j, k) => {
                chi[(j, k)] += Complex64::new(0.0, x[c]);
                chi[(k, j)] += Complex64::new(0.0, -x[c]);
            }
        }
    }
    ProcessMatrix::new(m, chi)
}

/// Merge staged reports: stage-one values win, residuals take the maximum.
fn merge_reports(
    m: usize,
    first: &ReconstructionReport,
    second: &ReconstructionReport,
) -> Result<ReconstructionReport> {
    let labels = full_parameter_set(m);
    let first_solved = first.solved_values();
    let second_solved = second.solved_values();
    let mut x = DVector::<f64>::zeros(labels.len());
    let mut resolved = Vec::new();
    let mut unresolved = Vec::new();
    for (c, param) in labels.iter().enumerate() {
        if let Some(&value) = first_solved.get(param) {
            x[c] = value;
            resolved.push(*param);
        } else if let Some(&value) = second_solved.get(param) {
            x[c] = value;
            resolved.push(*param);
        } else {
            unresolved.push(*param);
        }
    }
    Ok(ReconstructionReport {
        chi_estimate: chi_from_values(m, &labels, &x)?,
        resolved,
        unresolved,
        max_residual: first.max_residual.max(second.max_residual),
    })
}

/// Run the whole pipeline against an exactly simulated channel: plan,
/// simulate, assemble in stages, solve, and merge.
pub fn characterize(
    entries: &[CatalogEntry],
    chi_true: &ProcessMatrix,
) -> Result<ReconstructionReport> {
    let diag_plan = plan_diagonal(entries)?;
    if diag_plan.m() != chi_true.m() {
        return Err(Error::ProcessDimensionMismatch {
            dim: chi_true.dim(),
            m: chi_true.m(),
            expected: diag_plan.m(),
        });
    }
    let diag_probs = simulate_plan(&diag_plan, chi_true)?;
    let diag_system = assemble(&diag_plan, &diag_probs, &BTreeMap::new())?;
    let diag_report = solve(&diag_system)?;

    let pairs = all_offdiagonal_pairs(chi_true.m());
    let off_plan = plan_offdiagonal(entries, &pairs)?;
    let off_probs = simulate_plan(&off_plan, chi_true)?;
    let off_system = assemble(&off_plan, &off_probs, &diag_report.solved_values())?;
    let off_report = solve(&off_system)?;

    merge_reports(chi_true.m(), &diag_report, &off_report)
}

/// Resource estimate for characterizing an m-qubit channel with a family of
/// degree-gamma codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceEstimate {
    /// Distinct logical preparations needed.
    pub preparations: usize,
    /// Order-of-magnitude count of measurement configurations.
    pub configurations: usize,
}

/// Preparations scale as gamma + 1; configurations as gamma * 4^m.  The
/// configuration count is an order-of-magnitude figure, not an exact
/// schedule length.
pub fn resource_estimate(m: usize, gamma: usize, k: usize) -> Result<ResourceEstimate> {
    if gamma == 0 {
        return Err(Error::MalformedInput {
            what: "resource estimate".into(),
            reason: "gamma must be at least 1".into(),
        });
    }
    if k == 0 {
        return Err(Error::MalformedInput {
            what: "resource estimate".into(),
            reason: "k must be at least 1".into(),
        });
    }
    Ok(ResourceEstimate {
        preparations: gamma + 1,
        configurations: gamma << (2 * m),
    })
}

/// Design matrix of the four-input schedule `[0L, +L, upL, theta]`: each row
/// maps `(C, cX, cY, cZ)` to a probability.
pub fn four_input_design(theta: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0,
            0.0,
            0.0,
            1.0,
            1.0,
            1.0,
            0.0,
            0.0,
            1.0,
            0.0,
            1.0,
            0.0,
            1.0,
            (2.0 * theta).sin(),
            0.0,
            (2.0 * theta).cos(),
        ],
    )
}

/// Solve the four-input schedule at one syndrome: given the probabilities
/// for inputs `[0L, +L, upL, theta]`, recover `(C, cX, cY, cZ)` where C is
/// the input-independent part and the c's are the logical-axis weights.
pub fn solve_four_input(probabilities: &[f64; 4], theta: f64) -> Result<[f64; 4]> {
    let design = four_input_design(theta);
    let rhs = DVector::from_row_slice(probabilities);
    let solution = design
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::MalformedInput {
            what: "four-input schedule".into(),
            reason: format!("design matrix is singular at theta = {theta}"),
        })?;
    Ok([solution[0], solution[1], solution[2], solution[3]])
}

/// Render a report as fixed-width text (`human`) or as a JSON document with
/// 17-significant-digit values (`structured`).
pub fn render_report(report: &ReconstructionReport, structured: bool) -> String {
    let m = report.chi_estimate().m();
    let labels = full_parameter_set(m);
    let resolved: BTreeSet<ChiParam> = report.resolved().iter().copied().collect();
    if structured {
        let mut out = String::from("{\n  \"parameters\": [\n");
        for (index, param) in labels.iter().enumerate() {
            let value = param.value_in(report.chi_estimate());
            let comma = if index + 1 < labels.len() { "," } else { "" };
            out.push_str(&format!(
                "    {{\"label\": \"{}\", \"value\": {:.16e}, \"resolved\": {}}}{}\n",
                param.label(m),
                value,
                resolved.contains(param),
                comma
            ));
        }
        out.push_str(&format!(
            "  ],\n  \"max_residual\": {:.16e}\n}}\n",
            report.max_residual()
        ));
        out
    } else {
        let mut out = String::new();
        out.push_str(&format!("{:<24} {:>14} {}\n", "parameter", "value", "status"));
        for param in &labels {
            let value = param.value_in(report.chi_estimate());
            // Round at display precision so solver dust prints as 0, not -0.
            let mut shown = (value * 1e6).round() / 1e6;
            if shown == 0.0 {
                shown = 0.0;
            }
            let status = if resolved.contains(param) {
                "resolved"
            } else {
                "unresolved"
            };
            out.push_str(&format!(
                "{:<24} {:>14.6} {}\n",
                param.label(m),
                shown,
                status
            ));
        }
        out.push_str(&format!("max residual {:.3e}\n", report.max_residual()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_toy_noise_ea, EA_GOLDEN};
    use crate::codes;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c_family() -> Vec<CatalogEntry> {
        ["C1", "C2", "C3"]
            .iter()
            .map(|id| codes::get(id).unwrap())
            .collect()
    }

    fn token(text: &str) -> usize {
        PauliOperator::parse(text, 2).unwrap().basis_index()
    }

    #[test]
    fn diagonal_plan_picks_vanishing_inputs() {
        let plan = plan_diagonal(&c_family()).unwrap();
        assert_eq!(plan.items().len(), 3);
        let inputs: Vec<&str> = plan
            .items()
            .iter()
            .map(|item| item.record.input.as_str())
            .collect();
        // All three codes carry Y_L cross terms: the transforms relabel the
        // physical letters but the logical action of the identity-set
        // elements moves with the codewords.
        assert_eq!(inputs, vec!["0L", "0L", "0L"]);
        for item in plan.items() {
            assert_eq!(item.record.preprocessing, "none");
            assert_eq!(item.anchors.len(), 8);
            assert_eq!(item.stage, PlanStage::Diagonal);
        }
    }

    #[test]
    fn diagonal_plan_falls_back_to_schedule() {
        // q3 sets mix all three axes, so no single input cancels them.
        let plan = plan_diagonal(&[codes::get("q3").unwrap()]).unwrap();
        assert_eq!(plan.items().len(), 4);
        let inputs: Vec<&str> = plan
            .items()
            .iter()
            .map(|item| item.record.input.as_str())
            .collect();
        assert_eq!(inputs[0], "0L");
        assert_eq!(inputs[1], "+L");
        assert_eq!(inputs[2], "upL");
        assert!(inputs[3].starts_with("1.04719"));
    }

    #[test]
    fn c1_diagonal_rows_pair_up() {
        // Each C1 direct row is a two-element diagonal sum, e.g.
        // chi_II + chi_{Y2,Y2} for the trivial syndrome.
        let entry = codes::get("C1").unwrap();
        let plan = plan_diagonal(&[entry.clone()]).unwrap();
        let chi = make_toy_noise_ea(EA_GOLDEN);
        let probs = simulate_plan(&plan, &chi).unwrap();
        let system = assemble(&plan, &probs, &BTreeMap::new()).unwrap();
        assert_eq!(system.design().nrows(), 8);
        for r in 0..8 {
            let nonzero: Vec<usize> = (0..system.labels().len())
                .filter(|&c| system.design()[(r, c)].abs() > 1e-12)
                .collect();
            assert_eq!(nonzero.len(), 2, "row {r}");
            for c in nonzero {
                assert!(matches!(system.labels()[c], ChiParam::Diag(_)));
                assert!((system.design()[(r, c)] - 1.0).abs() < 1e-12);
            }
        }
        let trivial_row = 0; // canonical syndrome order starts at +++
        let ii = token("II");
        let iy = token("IY");
        let expected =
            chi.chi()[(ii, ii)].re + chi.chi()[(iy, iy)].re;
        assert!((system.observations()[trivial_row] - expected).abs() < 1e-12);
    }

    #[test]
    fn family_diagonal_stage_resolves_all_sixteen() {
        let chi = make_toy_noise_ea(EA_GOLDEN);
        let plan = plan_diagonal(&c_family()).unwrap();
        let probs = simulate_plan(&plan, &chi).unwrap();
        let system = assemble(&plan, &probs, &BTreeMap::new()).unwrap();
        let report = solve(&system).unwrap();
        let resolved_diagonals = report
            .resolved()
            .iter()
            .filter(|p| matches!(p, ChiParam::Diag(_)))
            .count();
        assert_eq!(resolved_diagonals, 16);
        for j in 0..16 {
            let estimate = report.chi_estimate().chi()[(j, j)].re;
            let truth = chi.chi()[(j, j)].re;
            assert!((estimate - truth).abs() < 1e-9, "diag {j}");
        }
        assert!(report.max_residual() < 1e-10);
    }

    #[test]
    fn single_code_diagonal_stage_reports_unresolved() {
        // C1 alone pairs diagonals two by two: sums resolve, splits do not.
        let chi = make_toy_noise_ea(EA_GOLDEN);
        let plan = plan_diagonal(&[codes::get("C1").unwrap()]).unwrap();
        let probs = simulate_plan(&plan, &chi).unwrap();
        let system = assemble(&plan, &probs, &BTreeMap::new()).unwrap();
        let report = solve(&system).unwrap();
        let resolved_diagonals = report
            .resolved()
            .iter()
            .filter(|p| matches!(p, ChiParam::Diag(_)))
            .count();
        assert_eq!(resolved_diagonals, 0);
        assert!(report
            .unresolved()
            .iter()
            .any(|p| *p == ChiParam::Diag(token("II"))));
    }

    #[test]
    fn monotone_coverage_when_adding_codes() {
        let chi = make_toy_noise_ea(EA_GOLDEN);
        let mut resolved_counts = Vec::new();
        for count in 1..=3 {
            let entries = c_family()[..count].to_vec();
            let plan = plan_diagonal(&entries).unwrap();
            let probs = simulate_plan(&plan, &chi).unwrap();
            let system = assemble(&plan, &probs, &BTreeMap::new()).unwrap();
            let report = solve(&system).unwrap();
            resolved_counts.push(report.resolved().len());
        }
        assert!(resolved_counts[0] <= resolved_counts[1]);
        assert!(resolved_counts[1] <= resolved_counts[2]);
    }

    #[test]
    fn offdiagonal_plan_reports_unreachable_pairs() {
        // On q3 alone, II and XX share the trivial syndrome.
        let entries = vec![codes::get("q3").unwrap()];
        let pair = (token("II"), token("XX"));
        let plan = plan_offdiagonal(&entries, &[pair]).unwrap();
        assert!(plan.items().is_empty());
        assert_eq!(
            plan.unreachable(),
            &[
                ChiParam::Re(pair.0, pair.1),
                ChiParam::Im(pair.0, pair.1)
            ]
        );
        // All three codes in the family separate this pair; each code gets
        // two inputs, untoggled plus toggled.
        let plan = plan_offdiagonal(&c_family(), &[pair]).unwrap();
        assert!(plan.unreachable().is_empty());
        assert_eq!(plan.items().len(), 12);
        assert_eq!(plan.items()[0].record.code, "C1");
        let toggled = plan
            .items()
            .iter()
            .filter(|item| item.record.preprocessing.starts_with("T:"))
            .count();
        assert_eq!(toggled, 6);
    }

    #[test]
    fn assemble_requires_all_probabilities() {
        let chi = make_toy_noise_ea(EA_GOLDEN);
        let plan = plan_diagonal(&[codes::get("C1").unwrap()]).unwrap();
        let mut probs = simulate_plan(&plan, &chi).unwrap();
        probs.pop();
        assert!(matches!(
            assemble(&plan, &probs, &BTreeMap::new()),
            Err(Error::MissingProbability { .. })
        ));
    }

    #[test]
    fn rows_reproduce_their_functionals() {
        // A x_true = b for the true chi, since observations are exact.
        let chi = make_toy_noise_ea(EA_GOLDEN);
        let entries = c_family();
        let mut plan = plan_diagonal(&entries).unwrap();
        plan.extend(plan_offdiagonal(&entries, &[(token("II"), token("XX"))]).unwrap())
            .unwrap();
        let probs = simulate_plan(&plan, &chi).unwrap();
        let system = assemble(&plan, &probs, &BTreeMap::new()).unwrap();
        let x_true = DVector::from_iterator(
            system.labels().len(),
            system.labels().iter().map(|p| p.value_in(&chi)),
        );
        let residual = (system.design() * x_true - system.observations()).abs().max();
        assert!(residual < 1e-12, "residual {residual}");
    }

    #[test]
    fn golden_round_trip_recovers_ea() {
        let chi = make_toy_noise_ea(EA_GOLDEN);
        let report = characterize(&c_family(), &chi).unwrap();
        assert!(report.unresolved().is_empty(), "{:?}", report.unresolved());
        let estimate = report.chi_estimate().chi();
        let truth = chi.chi();
        let worst = (estimate - truth).camax();
        assert!(worst < 1e-9, "worst deviation {worst}");
        assert!(report.max_residual() < 1e-9);
        // The expected solved values: Re(I,XX) = c/6, Re(X1,X2) = a/6,
        // Im(XZ,Y2) = f/6 (as Im(Y2,XZ) = -f/6 in canonical index order).
        let c6 = estimate[(token("II"), token("XX"))].re;
        assert!((c6 - 0.012 / 6.0).abs() < 1e-9);
        let a6 = estimate[(token("XI"), token("IX"))].re;
        assert!((a6 - 0.03 / 6.0).abs() < 1e-9);
        let f6 = estimate[(token("XZ"), token("IY"))].im;
        assert!((f6 - 0.042 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn staging_matches_joint_solve() {
        let chi = make_toy_noise_ea(EA_GOLDEN);
        let entries = c_family();
        let staged = characterize(&entries, &chi).unwrap();
        let mut joint_plan = plan_diagonal(&entries).unwrap();
        joint_plan
            .extend(plan_offdiagonal(&entries, &all_offdiagonal_pairs(2)).unwrap())
            .unwrap();
        let probs = simulate_plan(&joint_plan, &chi).unwrap();
        let system = assemble(&joint_plan, &probs, &BTreeMap::new()).unwrap();
        let joint = solve(&system).unwrap();
        let difference = (staged.chi_estimate().chi() - joint.chi_estimate().chi()).camax();
        assert!(difference < 1e-9, "staged vs joint deviation {difference}");
    }

    #[test]
    fn random_hermitian_round_trip() {
        let mut rng = StdRng::seed_from_u64(41);
        let dim = 16usize;
        let raw = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1))
        });
        let mut hermitian = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
        let mass: Complex64 = hermitian.diagonal().iter().sum();
        let shift = (Complex64::new(1.0, 0.0) - mass) / Complex64::new(dim as f64, 0.0);
        for j in 0..dim {
            hermitian[(j, j)] += shift;
        }
        let chi = ProcessMatrix::new(2, hermitian).unwrap();
        let report = characterize(&c_family(), &chi).unwrap();
        assert!(report.unresolved().is_empty());
        let worst = (report.chi_estimate().chi() - chi.chi()).camax();
        assert!(worst < 1e-9, "worst deviation {worst}");
    }

    #[test]
    fn identity_noise_round_trip() {
        let chi = ProcessMatrix::identity(2);
        let report = characterize(&c_family(), &chi).unwrap();
        assert!(report.unresolved().is_empty());
        let estimate = report.chi_estimate().chi();
        assert!((estimate[(0, 0)].re - 1.0).abs() < 1e-10);
        let mut off_mass = 0.0f64;
        for j in 0..16 {
            for k in 0..16 {
                if j != k || j > 0 {
                    off_mass = off_mass.max(estimate[(j, k)].norm());
                }
            }
        }
        assert!(off_mass < 1e-10);
        assert!(report.max_residual() < 1e-10);
    }

    #[test]
    fn resource_estimates_match_formulas() {
        assert_eq!(
            resource_estimate(2, 1, 1).unwrap(),
            ResourceEstimate {
                preparations: 2,
                configurations: 16
            }
        );
        assert_eq!(
            resource_estimate(2, 2, 1).unwrap(),
            ResourceEstimate {
                preparations: 3,
                configurations: 32
            }
        );
        assert_eq!(
            resource_estimate(2, 4, 1).unwrap(),
            ResourceEstimate {
                preparations: 5,
                configurations: 64
            }
        );
        assert!(resource_estimate(2, 0, 1).is_err());
    }

    #[test]
    fn four_input_schedule_solves_coefficients() {
        // Build synthetic probabilities from known coefficients and check
        // the schedule recovers them.
        let coefficients = [0.4, 0.05, -0.03, 0.12];
        let design = four_input_design(SCHEDULE_THETA);
        let mut probabilities = [0.0f64; 4];
        for r in 0..4 {
            for c in 0..4 {
                probabilities[r] += design[(r, c)] * coefficients[c];
            }
        }
        let solved = solve_four_input(&probabilities, SCHEDULE_THETA).unwrap();
        for (got, want) in solved.iter().zip(&coefficients) {
            assert!((got - want).abs() < 1e-12);
        }
        // theta = 0 collapses the fourth row onto the first.
        assert!(solve_four_input(&probabilities, 0.0).is_err());
    }

    #[test]
    fn report_rendering_is_deterministic() {
        let chi = make_toy_noise_ea(EA_GOLDEN);
        let report = characterize(&c_family(), &chi).unwrap();
        let human = render_report(&report, false);
        assert!(human.contains("chi(II,II)"));
        assert!(human.contains("resolved"));
        assert!(human.ends_with('\n'));
        let structured = render_report(&report, true);
        assert_eq!(structured, render_report(&report, true));
        let parsed: serde_json::Value = serde_json::from_str(&structured).unwrap();
        assert_eq!(parsed["parameters"].as_array().unwrap().len(), 256);
    }
}
