//! Exact syndrome-outcome prediction for noisy encoded states.
//!
//! Two independent routes compute the same probabilities.  The dense route
//! applies the process matrix to an encoded density matrix, conjugates by the
//! optional preprocessing operators, and traces against syndrome projectors.
//! The symbolic route expresses each probability as a linear functional over
//! the real parameters of the process matrix, with coefficients scaled by
//! logical expectation values.  The dense route is the testing oracle; the
//! symbolic route is what reconstruction inverts.
//!
//! Preprocessing comes in two flavors.  A two-error unitary mixes the pair
//! `(E_a + E_b)/sqrt(2)` (anticommuting) or `(E_a + i E_b)/sqrt(2)`
//! (commuting), exposing real or imaginary parts of cross-set process-matrix
//! entries.  A toggler applies `exp(+/- i pi/4)` on the erroneous subspaces
//! ahead of the unitary, swapping which quadrature the cross terms expose.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ambiguity::{build_class, AmbiguousClass, ErrorSet};
use crate::channel::ProcessMatrix;
use crate::codes::{self, CatalogEntry};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::stabilizer::{StabilizerCode, Syndrome};

/// Coefficients smaller than this are dropped from assembled functionals.
const COEFF_PRUNE_TOL: f64 = 1e-12;
/// Input amplitude vectors must be normalized to within this tolerance.
const INPUT_NORM_TOL: f64 = 1e-9;
/// Process-matrix entries above this count as support when checking whether
/// the noise stays inside the allowed error set.
const SUPPORT_TOL: f64 = 1e-14;

/// Symbolic scale attached to a functional coefficient: either the constant
/// one or a logical expectation value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LogicalAxis {
    /// Input-independent contribution.
    Unit,
    /// Scaled by the logical X expectation.
    X,
    /// Scaled by the logical Y expectation.
    Y,
    /// Scaled by the logical Z expectation.
    Z,
}

impl LogicalAxis {
    fn from_letter(letter: char) -> Self {
        match letter {
            'I' => LogicalAxis::Unit,
            'X' => LogicalAxis::X,
            'Y' => LogicalAxis::Y,
            'Z' => LogicalAxis::Z,
            _ => unreachable!("logical letters are Pauli letters"),
        }
    }

    /// The factor this axis contributes given `[<X_L>, <Y_L>, <Z_L>]`.
    pub fn value(self, expectations: &[f64; 3]) -> f64 {
        match self {
            LogicalAxis::Unit => 1.0,
            LogicalAxis::X => expectations[0],
            LogicalAxis::Y => expectations[1],
            LogicalAxis::Z => expectations[2],
        }
    }
}

/// One real degree of freedom of an m-qubit process matrix.  Indices refer to
/// the phase-free Pauli basis in lexicographic order (`basis_index`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChiParam {
    /// Diagonal entry chi_{jj}.
    Diag(usize),
    /// Real part of chi_{jk} with j < k.
    Re(usize, usize),
    /// Imaginary part of chi_{jk} with j < k.
    Im(usize, usize),
}

impl ChiParam {
    /// Human-readable label such as `Re chi(II,XX)`.
    pub fn label(&self, m: usize) -> String {
        let token = |index: usize| {
            PauliOperator::from_basis_index(m, index)
                .map(|op| op.to_string())
                .unwrap_or_else(|_| format!("#{index}"))
        };
        match self {
            ChiParam::Diag(j) => format!("chi({},{})", token(*j), token(*j)),
            ChiParam::Re(j, k) => format!("Re chi({},{})", token(*j), token(*k)),
            ChiParam::Im(j, k) => format!("Im chi({},{})", token(*j), token(*k)),
        }
    }

    /// Value of this parameter in a concrete process matrix.
    pub fn value_in(&self, chi: &ProcessMatrix) -> f64 {
        match *self {
            ChiParam::Diag(j) => chi.chi()[(j, j)].re,
            ChiParam::Re(j, k) => chi.chi()[(j, k)].re,
            ChiParam::Im(j, k) => chi.chi()[(j, k)].im,
        }
    }
}

/// A syndrome probability written as a linear functional over process-matrix
/// parameters, with each coefficient scaled by a logical expectation value.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityFunctional {
    m: usize,
    terms: BTreeMap<(ChiParam, LogicalAxis), f64>,
}

impl ProbabilityFunctional {
    fn new(m: usize) -> Self {
        ProbabilityFunctional {
            m,
            terms: BTreeMap::new(),
        }
    }

    /// Number of noisy qubits the chi parameters refer to.
    pub fn m(&self) -> usize {
        self.m
    }

    /// All coefficients, keyed by parameter and symbolic scale.
    pub fn terms(&self) -> &BTreeMap<(ChiParam, LogicalAxis), f64> {
        &self.terms
    }

    /// The set of chi parameters with nonzero coefficients.
    pub fn support(&self) -> BTreeSet<ChiParam> {
        self.terms.keys().map(|(param, _)| *param).collect()
    }

    /// Evaluate at a concrete process matrix and concrete logical
    /// expectations `[<X_L>, <Y_L>, <Z_L>]`.
    pub fn evaluate(&self, chi: &ProcessMatrix, expectations: &[f64; 3]) -> Result<f64> {
        if chi.m() != self.m {
            return Err(Error::DimensionMismatch {
                left: 1 << (2 * self.m),
                right: chi.dim(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(&(param, axis), &w)| w * param.value_in(chi) * axis.value(expectations))
            .sum())
    }

    /// Record the contribution `w * Re(chi_{jk} i^q) * <axis>`, folding the
    /// index order to j <= k and the phase power into the Re/Im split.
    fn emit(&mut self, mut j: usize, mut k: usize, mut q: u8, w: f64, axis: LogicalAxis) {
        if j > k {
            // chi_{kj} is the conjugate entry, which flips the phase power.
            std::mem::swap(&mut j, &mut k);
            q = (4 - q % 4) % 4;
        }
        let (param, coeff) = match q % 4 {
            0 if j == k => (ChiParam::Diag(j), w),
            2 if j == k => (ChiParam::Diag(j), -w),
            // Im(chi_jj) = 0 for Hermitian chi; odd powers vanish on the
            // diagonal.
            _ if j == k => return,
            0 => (ChiParam::Re(j, k), w),
            2 => (ChiParam::Re(j, k), -w),
            1 => (ChiParam::Im(j, k), -w),
            _ => (ChiParam::Im(j, k), w),
        };
        *self.terms.entry((param, axis)).or_insert(0.0) += coeff;
    }

    fn prune(mut self) -> Self {
        self.terms.retain(|_, w| w.abs() > COEFF_PRUNE_TOL);
        self
    }
}

/// The two errors mixed by a preprocessing unitary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitarySpec {
    e_a: PauliOperator,
    e_b: PauliOperator,
}

impl UnitarySpec {
    /// Validate a preprocessing pair: the errors must be phase-free and
    /// distinct.  Whether they are mutually ambiguous depends on the code,
    /// so that rejection happens at configuration time.
    pub fn new(e_a: PauliOperator, e_b: PauliOperator) -> Result<Self> {
        if e_a.n() != e_b.n() {
            return Err(Error::DimensionMismatch {
                left: e_a.n(),
                right: e_b.n(),
            });
        }
        if e_a.phase_exp() != 0 || e_b.phase_exp() != 0 {
            return Err(Error::MalformedInput {
                what: "preprocessing pair".into(),
                reason: "errors must carry no phase".into(),
            });
        }
        if e_a == e_b {
            return Err(Error::MalformedInput {
                what: "preprocessing pair".into(),
                reason: format!("errors must differ, got {e_a} twice"),
            });
        }
        Ok(UnitarySpec { e_a, e_b })
    }

    /// First error of the pair.
    pub fn e_a(&self) -> &PauliOperator {
        &self.e_a
    }

    /// Second error of the pair.
    pub fn e_b(&self) -> &PauliOperator {
        &self.e_b
    }

    /// Whether the two errors commute (selects the unitary's form).
    pub fn commuting(&self) -> Result<bool> {
        self.e_a.commutes(&self.e_b)
    }
}

/// What happens between the noise and the syndrome measurement.
#[derive(Debug, Clone)]
pub enum Preprocessing {
    /// Measure the syndrome directly.
    None,
    /// Apply the two-error mixing unitary.
    Unitary(UnitarySpec),
    /// Apply the toggler with the given signs, then the mixing unitary.
    Toggled {
        /// Per-set phase signs, +1 for +pi/4 and -1 for -pi/4.
        signs: BTreeMap<Syndrome, i8>,
        /// The unitary applied after the toggler.
        spec: UnitarySpec,
    },
}

/// A fully specified run: code, noisy coordinates, logical input, and
/// preprocessing.  Immutable once built.
#[derive(Debug, Clone)]
pub struct Configuration {
    code: StabilizerCode,
    coords: Vec<usize>,
    class: AmbiguousClass,
    input: Vec<Complex64>,
    preprocessing: Preprocessing,
}

impl Configuration {
    /// Configuration over the full Pauli group on the given coordinates.
    pub fn new(
        code: &StabilizerCode,
        coords: &[usize],
        input: Vec<Complex64>,
        preprocessing: Preprocessing,
    ) -> Result<Self> {
        let errors = ErrorSet::pauli_group_on(code.n(), coords)?;
        Configuration::with_allowed_errors(code, coords, &errors, input, preprocessing)
    }

    /// Configuration with an explicit allowed error set; noise outside the
    /// set is flagged by `syndrome_distribution` rather than rejected.
    pub fn with_allowed_errors(
        code: &StabilizerCode,
        coords: &[usize],
        errors: &ErrorSet,
        input: Vec<Complex64>,
        preprocessing: Preprocessing,
    ) -> Result<Self> {
        let class = build_class(code, errors)?;
        let expected = 1usize << code.k();
        if input.len() != expected {
            return Err(Error::MalformedInput {
                what: "logical input".into(),
                reason: format!("expected {expected} amplitudes, got {}", input.len()),
            });
        }
        let norm = input.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::MalformedInput {
                what: "logical input".into(),
                reason: format!("amplitudes have norm {norm}, expected 1"),
            });
        }
        let input: Vec<Complex64> = input.into_iter().map(|a| a / norm).collect();
        if let Preprocessing::Unitary(spec) | Preprocessing::Toggled { spec, .. } =
            &preprocessing
        {
            check_on_coords(spec.e_a(), coords)?;
            check_on_coords(spec.e_b(), coords)?;
            // UnitarySpec::new already rejected mutually ambiguous pairs for
            // this code; re-check here in case the spec came from elsewhere.
            if code.syndrome_of(spec.e_a())? == code.syndrome_of(spec.e_b())? {
                return Err(Error::AmbiguousPair {
                    left: spec.e_a().to_string(),
                    right: spec.e_b().to_string(),
                });
            }
        }
        if let Preprocessing::Toggled { signs, .. } = &preprocessing {
            check_toggler_signs(&class, signs)?;
        }
        Ok(Configuration {
            code: code.clone(),
            coords: coords.to_vec(),
            class,
            input,
            preprocessing,
        })
    }

    /// Convenience constructor for a catalog entry's designated coordinates.
    pub fn for_entry(
        entry: &CatalogEntry,
        input: Vec<Complex64>,
        preprocessing: Preprocessing,
    ) -> Result<Self> {
        Configuration::new(entry.code(), entry.noisy_coords(), input, preprocessing)
    }

    /// The code being simulated.
    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    /// Noisy coordinates, ascending.
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    /// The ambiguous-set partition of the allowed errors.
    pub fn class(&self) -> &AmbiguousClass {
        &self.class
    }

    /// Logical input amplitudes (normalized).
    pub fn input(&self) -> &[Complex64] {
        &self.input
    }

    /// The preprocessing step.
    pub fn preprocessing(&self) -> &Preprocessing {
        &self.preprocessing
    }
}

fn check_on_coords(op: &PauliOperator, coords: &[usize]) -> Result<()> {
    for q in 0..op.n() {
        if op.letter(q) != 'I' && !coords.contains(&q) {
            return Err(Error::CoordinateOutOfRange { coord: q, n: op.n() });
        }
    }
    Ok(())
}

fn check_toggler_signs(class: &AmbiguousClass, signs: &BTreeMap<Syndrome, i8>) -> Result<()> {
    let mut plus = 0usize;
    let mut minus = 0usize;
    for (syndrome, _) in class.sets() {
        match signs.get(syndrome) {
            Some(1) => plus += 1,
            Some(-1) => minus += 1,
            Some(other) => {
                return Err(Error::MalformedInput {
                    what: "toggler signs".into(),
                    reason: format!("sign {other} for {syndrome} is not +1 or -1"),
                })
            }
            None => {
                return Err(Error::MissingTogglerSign {
                    syndrome: syndrome.to_string(),
                })
            }
        }
    }
    for syndrome in signs.keys() {
        if class.set_for(syndrome).is_none() {
            return Err(Error::MalformedInput {
                what: "toggler signs".into(),
                reason: format!("syndrome {syndrome} does not label an ambiguous set"),
            });
        }
    }
    if plus != minus {
        return Err(Error::UnbalancedToggler {
            plus,
            minus,
            sets: class.order_sigma(),
        });
    }
    Ok(())
}

/// Exact syndrome probabilities for one configuration, dense route.
#[derive(Debug, Clone)]
pub struct SyndromeDistribution {
    probabilities: BTreeMap<Syndrome, f64>,
    outside_support: bool,
}

impl SyndromeDistribution {
    /// Probability per ambiguous-set syndrome, in canonical syndrome order.
    pub fn probabilities(&self) -> &BTreeMap<Syndrome, f64> {
        &self.probabilities
    }

    /// Sum over the reported syndromes.
    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }

    /// True when the process matrix has weight on errors outside the
    /// configuration's allowed set; the reported probabilities then need not
    /// sum to the total chi mass.
    pub fn outside_support(&self) -> bool {
        self.outside_support
    }
}

/// Compute the exact outcome distribution by dense linear algebra: encode,
/// apply the noise, conjugate by the preprocessing operators, and trace
/// against each syndrome projector.
pub fn syndrome_distribution(
    config: &Configuration,
    chi: &ProcessMatrix,
) -> Result<SyndromeDistribution> {
    if chi.m() != config.coords.len() {
        return Err(Error::ProcessDimensionMismatch {
            dim: chi.dim(),
            m: chi.m(),
            expected: config.coords.len(),
        });
    }
    let psi = config.code.encode(&config.input)?;
    let mut rho = &psi * psi.adjoint();
    rho = chi.apply_raw(&rho, &config.coords)?;
    match &config.preprocessing {
        Preprocessing::None => {}
        Preprocessing::Unitary(spec) => {
            let u = build_unitary(spec)?;
            rho = &u * rho * u.adjoint();
        }
        Preprocessing::Toggled { signs, spec } => {
            let t = build_toggler(&config.class, signs)?;
            let u = build_unitary(spec)?;
            rho = &t * rho * t.adjoint();
            rho = &u * rho * u.adjoint();
        }
    }
    let mut probabilities = BTreeMap::new();
    for (syndrome, _) in config.class.sets() {
        let projector = config.code.syndrome_projector(syndrome);
        let p = (&rho * projector).trace().re;
        probabilities.insert(syndrome.clone(), p);
    }
    Ok(SyndromeDistribution {
        probabilities,
        outside_support: chi_outside_support(config, chi)?,
    })
}

fn chi_outside_support(config: &Configuration, chi: &ProcessMatrix) -> Result<bool> {
    let allowed: BTreeSet<usize> = config
        .class
        .sets()
        .iter()
        .flat_map(|(_, elements)| elements.iter())
        .map(|e| e.restrict(&config.coords).map(|r| r.basis_index()))
        .collect::<Result<_>>()?;
    let dim = chi.dim();
    for j in 0..dim {
        for k in 0..dim {
            if chi.chi()[(j, k)].norm() > SUPPORT_TOL
                && (!allowed.contains(&j) || !allowed.contains(&k))
            {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// The mixing unitary for a pair of errors: `(E_a + E_b)/sqrt(2)` when they
/// anticommute, `(E_a + i E_b)/sqrt(2)` when they commute.
pub fn build_unitary(spec: &UnitarySpec) -> Result<DMatrix<Complex64>> {
    let ea = spec.e_a().to_matrix();
    let eb = spec.e_b().to_matrix();
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    if spec.commuting()? {
        Ok((ea + eb * Complex64::i()) * s)
    } else {
        Ok((ea + eb) * s)
    }
}

/// Decompose `e_side * e_j` as `g^{-1} * e_side * partner`: returns the
/// phase-free partner and the exponent q of the Pauli factor g = i^q, so that
/// `g * e_j = e_side * partner`.
pub fn pauli_factors(e_j: &PauliOperator, e_side: &PauliOperator) -> Result<(PauliOperator, u8)> {
    let product = e_side.multiply(e_j)?;
    let g_exp = (4 - product.phase_exp()) % 4;
    Ok((product.phase0(), g_exp))
}

/// The toggler: `exp(i sign pi/4)` on each erroneous logical subspace (one
/// representative error per ambiguous set), identity on the rest of the
/// space.  Signs must cover every set and balance.
pub fn build_toggler(
    class: &AmbiguousClass,
    signs: &BTreeMap<Syndrome, i8>,
) -> Result<DMatrix<Complex64>> {
    check_toggler_signs(class, signs)?;
    let code = class.code();
    let dim = 1usize << code.n();
    let code_projector = code.codespace_projector();
    let mut toggler = DMatrix::<Complex64>::zeros(dim, dim);
    let mut covered = DMatrix::<Complex64>::zeros(dim, dim);
    for (syndrome, elements) in class.sets() {
        // The representative is the lexicographically least error; the
        // subspace E Pi_C E does not depend on the choice.
        let representative = elements
            .iter()
            .min_by_key(|e| e.basis_index())
            .expect("ambiguous sets are nonempty")
            .to_matrix();
        let subspace = &representative * &code_projector * &representative;
        let theta = f64::from(signs[syndrome]) * std::f64::consts::FRAC_PI_4;
        toggler += &subspace * Complex64::from_polar(1.0, theta);
        covered += subspace;
    }
    toggler += DMatrix::<Complex64>::identity(dim, dim) - covered;
    Ok(toggler)
}

/// The toggler sign assignment used by the planner for a given unitary pair
/// and outcome: + on the set reached by `E_a` from the outcome set, - on the
/// set reached by `E_b`, the rest filled deterministically to balance.
pub fn canonical_toggler_signs(
    class: &AmbiguousClass,
    spec: &UnitarySpec,
    outcome: &Syndrome,
) -> Result<BTreeMap<Syndrome, i8>> {
    let code = class.code();
    if class.set_for(outcome).is_none() {
        return Err(Error::MalformedInput {
            what: "toggler plan".into(),
            reason: format!("syndrome {outcome} does not label an ambiguous set"),
        });
    }
    let plus_set = code.syndrome_of(spec.e_a())?.product(outcome)?;
    let minus_set = code.syndrome_of(spec.e_b())?.product(outcome)?;
    if plus_set == minus_set {
        return Err(Error::AmbiguousPair {
            left: spec.e_a().to_string(),
            right: spec.e_b().to_string(),
        });
    }
    let sigma = class.order_sigma();
    if sigma % 2 != 0 {
        return Err(Error::UnbalancedToggler {
            plus: sigma / 2 + 1,
            minus: sigma / 2,
            sets: sigma,
        });
    }
    let mut signs = BTreeMap::new();
    signs.insert(plus_set.clone(), 1i8);
    signs.insert(minus_set.clone(), -1i8);
    let mut plus = 1usize;
    for (syndrome, _) in class.sets() {
        if signs.contains_key(syndrome) {
            continue;
        }
        if plus < sigma / 2 {
            signs.insert(syndrome.clone(), 1);
            plus += 1;
        } else {
            signs.insert(syndrome.clone(), -1);
        }
    }
    Ok(signs)
}

/// Look up the logical action of a phase-free normalizer element as a letter
/// and a sign; only defined for k = 1 codes.
fn logical_letter(code: &StabilizerCode, op: &PauliOperator) -> Result<(LogicalAxis, f64)> {
    let (logical, phase_exp) = code.logical_action(op)?;
    if code.k() != 1 {
        return Err(Error::InvalidCode {
            reason: "probability functionals are only defined for k = 1 codes".into(),
        });
    }
    let sign = match phase_exp {
        0 => 1.0,
        2 => -1.0,
        other => {
            return Err(Error::InvalidCode {
                reason: format!(
                    "phase-free normalizer element {op} acts with non-real phase i^{other}"
                ),
            })
        }
    };
    Ok((LogicalAxis::from_letter(logical.letter(0)), sign))
}

struct FunctionalContext {
    class: AmbiguousClass,
    coords: Vec<usize>,
}

impl FunctionalContext {
    fn new(code: &StabilizerCode, coords: &[usize]) -> Result<Self> {
        let errors = ErrorSet::pauli_group_on(code.n(), coords)?;
        Ok(FunctionalContext {
            class: build_class(code, &errors)?,
            coords: coords.to_vec(),
        })
    }

    fn outcome_set(&self, syndrome: &Syndrome) -> Result<&[PauliOperator]> {
        self.class.set_for(syndrome).ok_or_else(|| Error::MalformedInput {
            what: "syndrome".into(),
            reason: format!("{syndrome} does not label an ambiguous set"),
        })
    }

    fn token_index(&self, op: &PauliOperator) -> Result<usize> {
        Ok(op.restrict(&self.coords)?.basis_index())
    }
}

/// The probability of a syndrome under direct measurement, as a functional:
/// the diagonal sum over the ambiguous set plus paired cross terms weighted
/// by logical expectations.
pub fn direct_functional(
    code: &StabilizerCode,
    coords: &[usize],
    syndrome: &Syndrome,
) -> Result<ProbabilityFunctional> {
    let ctx = FunctionalContext::new(code, coords)?;
    let elements = ctx.outcome_set(syndrome)?;
    let mut functional = ProbabilityFunctional::new(coords.len());
    for element in elements {
        let j = ctx.token_index(element)?;
        functional.emit(j, j, 0, 1.0, LogicalAxis::Unit);
    }
    for (a, e_a) in elements.iter().enumerate() {
        for e_b in &elements[a + 1..] {
            // The pair contributes 2 Re(chi_{ab} <E_b E_a>).
            let product = e_b.multiply(e_a)?;
            let (axis, sign) = logical_letter(code, &product.phase0())?;
            functional.emit(
                ctx.token_index(e_a)?,
                ctx.token_index(e_b)?,
                product.phase_exp(),
                2.0 * sign,
                axis,
            );
        }
    }
    Ok(functional.prune())
}

/// The probability of a syndrome after the mixing unitary (and optionally
/// the canonical toggler), as a functional.  With `toggled` set, the toggler
/// is assumed to place + on the set reached by `E_a` and - on the set
/// reached by `E_b`, which swaps the quadrature of every cross-family term.
pub fn preprocessed_functional(
    code: &StabilizerCode,
    coords: &[usize],
    spec: &UnitarySpec,
    syndrome: &Syndrome,
    toggled: bool,
) -> Result<ProbabilityFunctional> {
    if code.syndrome_of(spec.e_a())? == code.syndrome_of(spec.e_b())? {
        return Err(Error::AmbiguousPair {
            left: spec.e_a().to_string(),
            right: spec.e_b().to_string(),
        });
    }
    preprocessed_terms(code, coords, spec, syndrome, toggled)
}

/// Shared generator for the preprocessed functional; also used internally to
/// check that a mutually ambiguous pair reproduces the direct support.
fn preprocessed_terms(
    code: &StabilizerCode,
    coords: &[usize],
    spec: &UnitarySpec,
    syndrome: &Syndrome,
    toggled: bool,
) -> Result<ProbabilityFunctional> {
    let ctx = FunctionalContext::new(code, coords)?;
    let elements = ctx.outcome_set(syndrome)?;
    let commuting = spec.commuting()?;
    // Cross-family terms pick up e^{i(theta_a - theta_b)} = i from the
    // canonical toggler; within a family both partners share a set, so their
    // relative toggle phase vanishes.
    let cross_toggle: u8 = if toggled { 1 } else { 0 };

    let mut alphas = Vec::with_capacity(elements.len());
    let mut betas = Vec::with_capacity(elements.len());
    for element in elements {
        let (partner_a, g_a) = pauli_factors(element, spec.e_a())?;
        let (partner_b, g_b) = pauli_factors(element, spec.e_b())?;
        alphas.push((ctx.token_index(&partner_a)?, g_a));
        betas.push((ctx.token_index(&partner_b)?, g_b));
    }

    let mut functional = ProbabilityFunctional::new(coords.len());
    for ((j_a, _), (j_b, _)) in alphas.iter().zip(&betas) {
        functional.emit(*j_a, *j_a, 0, 0.5, LogicalAxis::Unit);
        functional.emit(*j_b, *j_b, 0, 0.5, LogicalAxis::Unit);
    }
    // Within-family pairs: for each unordered element pair, both the alpha
    // and the beta partners contribute Re(chi g_j conj(g_k) <E_b E_a>).
    for a in 0..elements.len() {
        for b in a + 1..elements.len() {
            let product = elements[b].multiply(&elements[a])?;
            let (axis, sign) = logical_letter(code, &product.phase0())?;
            for family in [&alphas, &betas] {
                let (j, g_j) = family[a];
                let (k, g_k) = family[b];
                let q = (g_j + 4 - g_k + product.phase_exp()) % 4;
                functional.emit(j, k, q, sign, axis);
            }
        }
    }
    // Cross-family terms run over all ordered pairs; the commuting unitary
    // exposes the other quadrature, hence the extra i^3.
    for (a, (j, g_j)) in alphas.iter().enumerate() {
        for (b, (k, g_k)) in betas.iter().enumerate() {
            let product = elements[b].multiply(&elements[a])?;
            let (axis, sign) = logical_letter(code, &product.phase0())?;
            let mut q = (g_j + 4 - g_k + product.phase_exp() + cross_toggle) % 4;
            if commuting {
                q = (q + 3) % 4;
            }
            functional.emit(*j, *k, q, sign, axis);
        }
    }
    Ok(functional.prune())
}

/// Expand a named logical input into amplitudes.  Accepted specs: `0L`,
/// `+L`, `upL`, or an angle theta in radians giving
/// `cos(theta)|0_L> + sin(theta)|1_L>`.  Named inputs require k = 1.
pub fn logical_input_amplitudes(spec: &str, k: usize) -> Result<Vec<Complex64>> {
    if k != 1 {
        return Err(Error::MalformedInput {
            what: "input spec".into(),
            reason: format!("named logical inputs require k = 1, code has k = {k}"),
        });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match spec.trim() {
        "0L" => Ok(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]),
        "+L" => Ok(vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)]),
        "upL" => Ok(vec![Complex64::new(s, 0.0), Complex64::new(0.0, s)]),
        other => {
            let theta: f64 = other.parse().map_err(|_| Error::MalformedInput {
                what: "input spec".into(),
                reason: format!("expected 0L, +L, upL, or an angle in radians, got {other:?}"),
            })?;
            Ok(vec![
                Complex64::new(theta.cos(), 0.0),
                Complex64::new(theta.sin(), 0.0),
            ])
        }
    }
}

/// One measurement-plan record as stored in plan files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PlanRecord {
    /// Catalog identifier of the code.
    pub code: String,
    /// Input-state spec: `0L`, `+L`, `upL`, or an angle in radians.
    pub input: String,
    /// Preprocessing spec: `none`, `U:Ea,Eb`, or `T:signs;U:Ea,Eb` with one
    /// +/- per ambiguous set in canonical syndrome order.
    pub preprocessing: String,
}

/// One output record: the probability of a syndrome under a plan row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeRecord {
    /// Index of the plan row that produced this outcome.
    pub plan_index: usize,
    /// Syndrome sign string.
    pub syndrome: String,
    /// Exact probability.
    pub probability: f64,
}

/// Parse a plan file (a JSON array of records).
pub fn parse_plan(text: &str) -> Result<Vec<PlanRecord>> {
    Ok(serde_json::from_str(text)?)
}

/// Turn a plan record into a runnable configuration on the record's code.
pub fn realize_plan_record(record: &PlanRecord) -> Result<(CatalogEntry, Configuration)> {
    let entry = codes::get(&record.code)?;
    let input = logical_input_amplitudes(&record.input, entry.code().k())?;
    let preprocessing = parse_preprocessing(&record.preprocessing, &entry)?;
    let config = Configuration::for_entry(&entry, input, preprocessing)?;
    Ok((entry, config))
}

fn parse_unitary_pair(text: &str, entry: &CatalogEntry) -> Result<UnitarySpec> {
    let (a_text, b_text) = text.split_once(',').ok_or_else(|| Error::MalformedInput {
        what: "preprocessing spec".into(),
        reason: format!("expected two comma-separated errors, got {text:?}"),
    })?;
    let n = entry.code().n();
    let e_a = PauliOperator::parse(a_text.trim(), n)?;
    let e_b = PauliOperator::parse(b_text.trim(), n)?;
    UnitarySpec::new(e_a, e_b)
}

fn parse_preprocessing(text: &str, entry: &CatalogEntry) -> Result<Preprocessing> {
    let text = text.trim();
    if text == "none" {
        return Ok(Preprocessing::None);
    }
    if let Some(rest) = text.strip_prefix("U:") {
        return Ok(Preprocessing::Unitary(parse_unitary_pair(rest, entry)?));
    }
    if let Some(rest) = text.strip_prefix("T:") {
        let (sign_text, unitary_text) =
            rest.split_once(';').ok_or_else(|| Error::MalformedInput {
                what: "preprocessing spec".into(),
                reason: "toggled spec must read T:signs;U:Ea,Eb".into(),
            })?;
        let unitary_rest =
            unitary_text
                .strip_prefix("U:")
                .ok_or_else(|| Error::MalformedInput {
                    what: "preprocessing spec".into(),
                    reason: "toggled spec must read T:signs;U:Ea,Eb".into(),
                })?;
        let spec = parse_unitary_pair(unitary_rest, entry)?;
        let errors = ErrorSet::pauli_group_on(entry.code().n(), entry.noisy_coords())?;
        let class = build_class(entry.code(), &errors)?;
        let sign_text = sign_text.trim();
        if sign_text.len() != class.order_sigma() {
            return Err(Error::MalformedInput {
                what: "toggler signs".into(),
                reason: format!(
                    "expected {} signs, got {}",
                    class.order_sigma(),
                    sign_text.len()
                ),
            });
        }
        let mut signs = BTreeMap::new();
        for ((syndrome, _), sign) in class.sets().iter().zip(sign_text.chars()) {
            let value = match sign {
                '+' => 1i8,
                '-' => -1i8,
                other => {
                    return Err(Error::MalformedInput {
                        what: "toggler signs".into(),
                        reason: format!("sign character {other:?} is not + or -"),
                    })
                }
            };
            signs.insert(syndrome.clone(), value);
        }
        return Ok(Preprocessing::Toggled { signs, spec });
    }
    Err(Error::MalformedInput {
        what: "preprocessing spec".into(),
        reason: format!("expected none, U:Ea,Eb, or T:signs;U:Ea,Eb, got {text:?}"),
    })
}

/// Render a toggler sign map as the plan-file sign string (canonical
/// syndrome order).
pub fn toggler_sign_string(signs: &BTreeMap<Syndrome, i8>) -> String {
    signs
        .values()
        .map(|&v| if v > 0 { '+' } else { '-' })
        .collect()
}

/// Run every plan row against one process matrix.  Returns the flattened
/// outcome records and any support warnings.
pub fn run_plan(
    records: &[PlanRecord],
    chi: &ProcessMatrix,
) -> Result<(Vec<OutcomeRecord>, Vec<String>)> {
    let mut outcomes = Vec::new();
    let mut warnings = Vec::new();
    for (index, record) in records.iter().enumerate() {
        let (_, config) = realize_plan_record(record)?;
        let distribution = syndrome_distribution(&config, chi)?;
        if distribution.outside_support() {
            warnings.push(format!(
                "plan row {index}: noise has support outside the allowed errors; \
                 probabilities sum to {:.6}",
                distribution.total()
            ));
        }
        for (syndrome, probability) in distribution.probabilities() {
            outcomes.push(OutcomeRecord {
                plan_index: index,
                syndrome: syndrome.to_string(),
                probability: *probability,
            });
        }
    }
    Ok((outcomes, warnings))
}
