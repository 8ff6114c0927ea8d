use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

const NORM_TOL: f64 = 1e-12;
const DENSITY_TOL: f64 = 1e-10;

/// Pure state `alpha|0> + beta|1>` of the qubit to be teleported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit {
    alpha: Complex64,
    beta: Complex64,
}

impl PureQubit {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL || !norm_sqr.is_finite() {
            return Err(Error::UnnormalizedQubit { norm_sqr });
        }
        Ok(Self { alpha, beta })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::UnnormalizedQubit { norm_sqr: norm * norm });
        }
        Self::new(alpha / norm, beta / norm)
    }

    pub fn zero() -> Self {
        Self {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    pub fn one() -> Self {
        Self {
            alpha: Complex64::new(0.0, 0.0),
            beta: Complex64::new(1.0, 0.0),
        }
    }

    /// `(|0> + |1>)/sqrt(2)`.
    pub fn plus() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { alpha: h, beta: h }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.alpha, self.beta]
    }

    /// `|psi><psi|`.
    pub fn density(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.amplitudes()).expect("two amplitudes")
    }

    /// `4 |alpha|^2 |beta|^2`, the weight of transferred entanglement.
    pub fn entanglement_weight(&self) -> f64 {
        4.0 * self.alpha.norm_sqr() * self.beta.norm_sqr()
    }
}

/// Density operator of the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvDensity {
    matrix: ComplexMatrix,
}

impl EnvDensity {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_hermitian(DENSITY_TOL) {
            return Err(Error::NotDensity("environment state is not Hermitian".into()));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOL || trace.im.abs() > DENSITY_TOL {
            return Err(Error::NotDensity(format!("environment trace is {trace}")));
        }
        if !matrix.is_psd(DENSITY_TOL) {
            return Err(Error::NotDensity("environment state has a negative eigenvalue".into()));
        }
        Ok(Self { matrix })
    }

    /// Diagonal state `Σ p_i |i><i|`.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        if populations.is_empty() {
            return Err(Error::NotDensity("empty environment".into()));
        }
        Self::new(ComplexMatrix::from_real_diag(populations))
    }

    /// Pure state `|v><v|`; `v` is normalized here.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if v.is_empty() || norm == 0.0 {
            return Err(Error::NotDensity("zero environment vector".into()));
        }
        let v: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::projector(&v)?)
    }

    /// One-dimensional environment (no environment at all).
    pub fn trivial() -> Self {
        Self {
            matrix: ComplexMatrix::identity(1),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// The four Bell states of a qubit pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellOutcome {
    /// `(|00> + |11>)/sqrt(2)`
    PhiPlus,
    /// `(|00> - |11>)/sqrt(2)`
    PhiMinus,
    /// `(|01> + |10>)/sqrt(2)`
    PsiPlus,
    /// `(|01> - |10>)/sqrt(2)`
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [Self::PhiPlus, Self::PhiMinus, Self::PsiPlus, Self::PsiMinus];

    /// Amplitudes over `|00>, |01>, |10>, |11>` of the ordered pair.
    pub fn vector(self) -> [Complex64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b, c, d) = match self {
            Self::PhiPlus => (h, 0.0, 0.0, h),
            Self::PhiMinus => (h, 0.0, 0.0, -h),
            Self::PsiPlus => (0.0, h, h, 0.0),
            Self::PsiMinus => (0.0, h, -h, 0.0),
        };
        [a, b, c, d].map(|x| Complex64::new(x, 0.0))
    }

    /// Projector `|λ><λ|` on the pair.
    pub fn projector(self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.vector()).expect("four amplitudes")
    }

    /// True for `Φ±`, false for `Ψ±`.
    pub fn is_phi(self) -> bool {
        matches!(self, Self::PhiPlus | Self::PhiMinus)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::PhiPlus => "phi+",
            Self::PhiMinus => "phi-",
            Self::PsiPlus => "psi+",
            Self::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "phi+" | "phiplus" | "phi_plus" => Ok(Self::PhiPlus),
            "phi-" | "phiminus" | "phi_minus" => Ok(Self::PhiMinus),
            "psi+" | "psiplus" | "psi_plus" => Ok(Self::PsiPlus),
            "psi-" | "psiminus" | "psi_minus" => Ok(Self::PsiMinus),
            other => Err(Error::InvalidParameter(format!("unknown Bell outcome `{other}`"))),
        }
    }
}
