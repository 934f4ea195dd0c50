use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the dense statevector routines accept.
pub const MAX_STATEVECTOR_SITES: usize = 12;

/// Single-qubit operator, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `σ_θ = σ_x cos θ + σ_y sin θ`.
pub fn sigma_theta(theta: f64) -> Mat2 {
    [
        [ZERO, Complex64::from_polar(1.0, -theta)],
        [Complex64::from_polar(1.0, theta), ZERO],
    ]
}

/// Rows are `⟨+_θ|` and `⟨-_θ|`, the eigenbras of `σ_θ`.
pub fn eigenbasis_rows(theta: f64) -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let e = Complex64::from_polar(s, -theta);
    [[Complex64::new(s, 0.0), e], [Complex64::new(s, 0.0), -e]]
}

/// Dense `n`-qubit state. Bit `k` of an amplitude index is site `k`, with
/// `0 = |↑⟩` and `1 = |↓⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    sites: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    fn check(sites: usize) -> Result<()> {
        if sites == 0 || sites > MAX_STATEVECTOR_SITES {
            return Err(Error::Capacity(format!(
                "statevector supports 1..={MAX_STATEVECTOR_SITES} sites, got {sites}"
            )));
        }
        Ok(())
    }

    /// `(|↑…↑⟩ − |↓…↓⟩)/√2`.
    pub fn ghz(sites: usize) -> Result<Self> {
        Self::check(sites)?;
        let mut amps = vec![ZERO; 1 << sites];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] = Complex64::new(s, 0.0);
        amps[(1 << sites) - 1] = Complex64::new(-s, 0.0);
        Ok(StateVector { sites, amps })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `m` to site `site` in place.
    pub fn apply(&mut self, site: usize, m: &Mat2) {
        let bit = 1usize << site;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `⟨ψ| ⊗_k ops[k] |ψ⟩`.
    pub fn expectation(&self, ops: &[Mat2]) -> Result<Complex64> {
        if ops.len() != self.sites {
            return Err(Error::Dimension(format!(
                "{} operators for a {}-site state",
                ops.len(),
                self.sites
            )));
        }
        let mut phi = self.clone();
        for (k, m) in ops.iter().enumerate() {
            phi.apply(k, m);
        }
        Ok(self.inner(&phi))
    }

    /// Joint distribution of the `±1` outcomes of measuring `σ_{θ_k}` at every
    /// site. Index bit `k` set means outcome `-1` at site `k`.
    pub fn outcome_probabilities(&self, thetas: &[f64]) -> Result<Vec<f64>> {
        if thetas.len() != self.sites {
            return Err(Error::Dimension(format!(
                "{} angles for a {}-site state",
                thetas.len(),
                self.sites
            )));
        }
        let mut phi = self.clone();
        for (k, &t) in thetas.iter().enumerate() {
            phi.apply(k, &eigenbasis_rows(t));
        }
        Ok(phi.amps.iter().map(|a| a.norm_sqr()).collect())
    }
}
