//! Process-matrix noise channels: representation in the Pauli error basis,
//! physicality diagnostics, and exact application to density matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

const HERM_TOL: f64 = 1e-9;
const FLAG_TOL: f64 = 1e-10;

/// Density matrix wrapper. `new` validates physicality; channel application
/// returns results unvalidated because test channels are allowed to be
/// non-physical (Hermitian-only) at the linear-functional level.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::MalformedInput {
                what: "density matrix".into(),
                reason: "not square".into(),
            });
        }
        let herm = (&matrix - matrix.adjoint()).camax();
        if herm > FLAG_TOL {
            return Err(Error::NotHermitian { residual: herm });
        }
        let trace: Complex64 = matrix.diagonal().iter().sum();
        if (trace - Complex64::new(1.0, 0.0)).norm() > FLAG_TOL {
            return Err(Error::MalformedInput {
                what: "density matrix".into(),
                reason: format!("trace {trace} is not 1"),
            });
        }
        let min_eig = hermitian_eigenvalues(&matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -FLAG_TOL {
            return Err(Error::MalformedInput {
                what: "density matrix".into(),
                reason: format!("negative eigenvalue {min_eig:.3e}"),
            });
        }
        Ok(Self { matrix })
    }

    /// |ψ⟩⟨ψ| for a unit-norm state.
    pub fn from_pure(state: &DVector<Complex64>) -> Result<Self> {
        if (state.norm() - 1.0).abs() > FLAG_TOL {
            return Err(Error::MalformedInput {
                what: "pure state".into(),
                reason: format!("norm {} is not 1", state.norm()),
            });
        }
        Ok(Self {
            matrix: state * state.adjoint(),
        })
    }

    /// Wraps a matrix without physicality checks; used for channel outputs,
    /// which stay Hermitian but need not be positive for test channels.
    pub fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.diagonal().iter().sum()
    }
}

/// Physicality report for a process matrix; each flag comes with the
/// max-abs residual that produced it.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub hermitian: bool,
    pub unit_mass: bool,
    pub trace_preserving: bool,
    pub completely_positive: bool,
    pub hermitian_residual: f64,
    pub mass_residual: f64,
    pub tp_residual: f64,
    pub cp_residual: f64,
}

/// Hermitian matrix χ indexed by the 4^m phase-0 Paulis on the noisy
/// coordinates, lexicographic in (I,X,Y,Z) with the leftmost coordinate most
/// significant. The channel acts as ρ → Σ_{jk} χ_{jk} E_j ρ E_k†.
#[derive(Clone, Debug)]
pub struct ProcessMatrix {
    m: usize,
    chi: DMatrix<Complex64>,
}

impl ProcessMatrix {
    pub fn new(m: usize, chi: DMatrix<Complex64>) -> Result<Self> {
        let dim = 1usize << (2 * m);
        if chi.nrows() != dim || chi.ncols() != dim {
            return Err(Error::ProcessDimensionMismatch {
                dim: chi.nrows(),
                m,
                expected: dim,
            });
        }
        let herm = (&chi - chi.adjoint()).camax();
        if herm > HERM_TOL {
            return Err(Error::NotHermitian { residual: herm });
        }
        Ok(Self { m, chi })
    }

    /// χ_{II} = 1: the identity channel.
    pub fn identity(m: usize) -> Self {
        let dim = 1usize << (2 * m);
        let mut chi = DMatrix::<Complex64>::zeros(dim, dim);
        chi[(0, 0)] = Complex64::new(1.0, 0.0);
        Self { m, chi }
    }

    /// Mixes toward the maximally mixed state with strength p.
    pub fn depolarizing(m: usize, p: f64) -> Self {
        let dim = 1usize << (2 * m);
        let mut chi = DMatrix::<Complex64>::zeros(dim, dim);
        let uniform = p / dim as f64;
        chi[(0, 0)] = Complex64::new(1.0 - p + uniform, 0.0);
        for j in 1..dim {
            chi[(j, j)] = Complex64::new(uniform, 0.0);
        }
        Self { m, chi }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.chi.nrows()
    }

    pub fn chi(&self) -> &DMatrix<Complex64> {
        &self.chi
    }

    /// The ordered error basis the indices refer to.
    pub fn basis(&self) -> Vec<PauliOperator> {
        PauliOperator::all_phase0(self.m).collect()
    }

    pub fn entry(&self, row: &PauliOperator, col: &PauliOperator) -> Complex64 {
        self.chi[(row.basis_index(), col.basis_index())]
    }

    /// Σ χ_{jk} E_j ρ E_k† with errors embedded on the given coordinates of
    /// ρ's register.
    pub fn apply(&self, rho: &DensityMatrix, coords: &[usize]) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_matrix_unchecked(
            self.apply_raw(rho.matrix(), coords)?,
        ))
    }

    pub(crate) fn apply_raw(
        &self,
        rho: &DMatrix<Complex64>,
        coords: &[usize],
    ) -> Result<DMatrix<Complex64>> {
        let n = match rho.nrows() {
            d if d.is_power_of_two() => d.trailing_zeros() as usize,
            d => {
                return Err(Error::MalformedInput {
                    what: "density matrix".into(),
                    reason: format!("dimension {d} is not a power of two"),
                })
            }
        };
        let dim = self.dim();
        let embedded: Vec<DMatrix<Complex64>> = PauliOperator::all_phase0(self.m)
            .map(|e| e.embed(n, coords).map(|w| w.to_matrix()))
            .collect::<Result<_>>()?;
        let mut out = DMatrix::<Complex64>::zeros(rho.nrows(), rho.ncols());
        for j in 0..dim {
            // C_j = Σ_k χ_{jk} E_k† collects the right factors of row j
            let mut right = DMatrix::<Complex64>::zeros(rho.nrows(), rho.ncols());
            for k in 0..dim {
                let w = self.chi[(j, k)];
                if w.norm_sqr() > 0.0 {
                    right += &embedded[k] * w;
                }
            }
            if right.camax() > 0.0 {
                out += &embedded[j] * rho * right;
            }
        }
        Ok(out)
    }

    /// Flags with residuals; nothing is enforced here.
    pub fn validate(&self) -> ValidationReport {
        let hermitian_residual = (&self.chi - self.chi.adjoint()).camax();
        let mass: Complex64 = self.chi.diagonal().iter().sum();
        let mass_residual = (mass - Complex64::new(1.0, 0.0)).norm();
        let qdim = 1usize << self.m;
        let mut tp = DMatrix::<Complex64>::zeros(qdim, qdim);
        let basis_mats: Vec<DMatrix<Complex64>> = PauliOperator::all_phase0(self.m)
            .map(|e| e.to_matrix())
            .collect();
        for j in 0..self.dim() {
            for k in 0..self.dim() {
                let w = self.chi[(j, k)];
                if w.norm_sqr() > 0.0 {
                    // tr(E_j ρ E_k†) = tr(ρ E_k† E_j): the right factor moves
                    // to the front, and phase-0 letters are Hermitian
                    tp += &basis_mats[k] * &basis_mats[j] * w;
                }
            }
        }
        let tp_residual = (&tp - DMatrix::<Complex64>::identity(qdim, qdim)).camax();
        let min_eig = hermitian_eigenvalues(&self.chi)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let cp_residual = (-min_eig).max(0.0);
        ValidationReport {
            hermitian: hermitian_residual <= FLAG_TOL,
            unit_mass: mass_residual <= FLAG_TOL,
            trace_preserving: tp_residual <= FLAG_TOL,
            completely_positive: cp_residual <= FLAG_TOL,
            hermitian_residual,
            mass_residual,
            tp_residual,
            cp_residual,
        }
    }

    pub fn to_json(&self) -> String {
        let basis = self.basis();
        let mut entries = Vec::new();
        for j in 0..self.dim() {
            for k in 0..self.dim() {
                let v = self.chi[(j, k)];
                if v.norm_sqr() > 0.0 {
                    entries.push(NoiseEntry {
                        row: basis[j].to_string(),
                        col: basis[k].to_string(),
                        re: v.re,
                        im: v.im,
                    });
                }
            }
        }
        serde_json::to_string_pretty(&NoiseFile {
            m: self.m,
            entries,
        })
        .expect("noise file serializes")
    }

    /// Parses the JSON noise format. Entries whose mirror image is absent
    /// are completed by Hermitian symmetry; conflicting mirrored entries are
    /// rejected by the Hermiticity check in `new`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: NoiseFile = serde_json::from_str(text)?;
        let dim = 1usize << (2 * file.m);
        let mut chi = DMatrix::<Complex64>::zeros(dim, dim);
        let mut touched = vec![false; dim * dim];
        for e in &file.entries {
            let row = PauliOperator::parse(&e.row, file.m)?;
            let col = PauliOperator::parse(&e.col, file.m)?;
            if row.phase_exp() != 0 || col.phase_exp() != 0 {
                return Err(Error::MalformedInput {
                    what: "noise file".into(),
                    reason: format!("basis labels must be phase-free: {} / {}", e.row, e.col),
                });
            }
            let (j, k) = (row.basis_index(), col.basis_index());
            if touched[j * dim + k] {
                return Err(Error::MalformedInput {
                    what: "noise file".into(),
                    reason: format!("duplicate entry ({}, {})", e.row, e.col),
                });
            }
            touched[j * dim + k] = true;
            chi[(j, k)] = Complex64::new(e.re, e.im);
        }
        for j in 0..dim {
            for k in 0..dim {
                if touched[j * dim + k] && !touched[k * dim + j] {
                    chi[(k, j)] = chi[(j, k)].conj();
                    touched[k * dim + j] = true;
                }
            }
        }
        Self::new(file.m, chi)
    }
}

#[derive(Serialize, Deserialize)]
struct NoiseFile {
    m: usize,
    entries: Vec<NoiseEntry>,
}

#[derive(Serialize, Deserialize)]
struct NoiseEntry {
    row: String,
    col: String,
    re: f64,
    im: f64,
}

/// Parameters of the two-qubit toy noise E_A.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EaParams {
    pub delta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

/// Golden E_A parameter choice: small magnitudes with b = d = e = 0,
/// projected onto the trace-preserving plane a + c − f = 0.
pub const EA_GOLDEN: EaParams = EaParams {
    delta: 0.7,
    a: 0.03,
    b: 0.0,
    c: 0.012,
    d: 0.0,
    e: 0.0,
    f: 0.042,
};

/// δρ + (1−δ)/5 (X₁ρX₁ + XZρXZ + Y₂ρY₂ + X₂ρX₂ + XXρXX)
/// + 1/6 ((a+ib) X₁ρX₂ + (c+id) ρXX + (e+if) XZρY₂ + c.c.).
pub fn make_toy_noise_ea(p: EaParams) -> ProcessMatrix {
    let dim = 16;
    let mut chi = DMatrix::<Complex64>::zeros(dim, dim);
    let idx = |s: &str| -> usize {
        s.parse::<PauliOperator>().expect("fixed label").basis_index()
    };
    let diag_rate = (1.0 - p.delta) / 5.0;
    chi[(idx("II"), idx("II"))] = Complex64::new(p.delta, 0.0);
    for label in ["XI", "XZ", "IY", "IX", "XX"] {
        chi[(idx(label), idx(label))] = Complex64::new(diag_rate, 0.0);
    }
    let mut put = |row: &str, col: &str, re: f64, im: f64| {
        chi[(idx(row), idx(col))] = Complex64::new(re, im) / 6.0;
        chi[(idx(col), idx(row))] = Complex64::new(re, -im) / 6.0;
    };
    put("XI", "IX", p.a, p.b);
    put("II", "XX", p.c, p.d);
    put("XZ", "IY", p.e, p.f);
    ProcessMatrix::new(2, chi).expect("E_A is Hermitian by construction")
}

/// Named presets accepted wherever a noise file is accepted.
pub fn noise_preset(name: &str, m: usize) -> Result<ProcessMatrix> {
    let trimmed = name.trim();
    if trimmed == "EA" {
        if m != 2 {
            return Err(Error::MalformedInput {
                what: "noise preset".into(),
                reason: format!("EA is a two-qubit noise, requested m = {m}"),
            });
        }
        return Ok(make_toy_noise_ea(EA_GOLDEN));
    }
    if trimmed == "identity" {
        return Ok(ProcessMatrix::identity(m));
    }
    if let Some(rest) = trimmed.strip_prefix("depolarizing(") {
        if let Some(inner) = rest.strip_suffix(')') {
            let pr: f64 = inner.trim().parse().map_err(|_| Error::MalformedInput {
                what: "noise preset".into(),
                reason: format!("bad depolarizing strength {inner:?}"),
            })?;
            return Ok(ProcessMatrix::depolarizing(m, pr));
        }
    }
    Err(Error::UnknownPreset {
        name: name.to_string(),
    })
}

/// Eigenvalues of a complex Hermitian matrix via the real symmetric
/// embedding [[Re, −Im], [Im, Re]], whose spectrum is the doubled original.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let d = m.nrows();
    let mut s = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let v = m[(i, j)];
            s[(i, j)] = v.re;
            s[(i + d, j + d)] = v.re;
            s[(i, j + d)] = -v.im;
            s[(i + d, j)] = v.im;
        }
    }
    let mut eigs: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // doubled spectrum: keep every second value
    eigs.into_iter().step_by(2).collect()
}
