//! Numerical tolerances used by validation and the solvers.
//!
//! The defaults are sized for double precision at total dimensions up to a
//! few dozen. Callers that need looser or tighter validation (for instance
//! when ingesting matrices produced by an external tool) can carry a
//! [`Tolerances`] value and construct objects through the `*_with_tol`
//! constructors.

/// Hermiticity residual allowed by [`crate::qcore::HermOp`].
pub const TOL_HERM: f64 = 1e-9;
/// Trace / norm deviation allowed for states.
pub const TOL_TRACE: f64 = 1e-9;
/// Channel validation residual (Kraus completeness, Choi marginal).
pub const TOL_CPTP: f64 = 1e-9;
/// POVM completeness residual.
pub const TOL_POVM: f64 = 1e-9;
/// Eigenvalue floor for positive-semidefinite checks. Eigenvalues in
/// `[-TOL_PSD, 0)` are clamped to zero; anything more negative is an error.
pub const TOL_PSD: f64 = 1e-8;
/// Schmidt coefficients below this are treated as rank-deficient directions.
pub const TOL_SCHMIDT: f64 = 1e-10;
/// Eigendecomposition reconstruction residual.
pub const TOL_EIG: f64 = 1e-10;
/// Strictness margin required of a reduction-criterion witness before the
/// protocol synthesis accepts it.
pub const TOL_MARGIN: f64 = 1e-7;

/// Bundled tolerance set. `Default` yields the constants above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub herm: f64,
    pub trace: f64,
    pub cptp: f64,
    pub povm: f64,
    pub psd: f64,
    pub schmidt: f64,
    pub eig: f64,
    pub margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: TOL_HERM,
            trace: TOL_TRACE,
            cptp: TOL_CPTP,
            povm: TOL_POVM,
            psd: TOL_PSD,
            schmidt: TOL_SCHMIDT,
            eig: TOL_EIG,
            margin: TOL_MARGIN,
        }
    }
}

impl Tolerances {
    /// Set one tolerance by name. Unknown keys are rejected so that
    /// command-line overrides cannot silently misspell a field.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), crate::Error> {
        match key {
            "herm" => self.herm = value,
            "trace" => self.trace = value,
            "cptp" => self.cptp = value,
            "povm" => self.povm = value,
            "psd" => self.psd = value,
            "schmidt" => self.schmidt = value,
            "eig" => self.eig = value,
            "margin" => self.margin = value,
            _ => return Err(crate::Error::UnknownTolerance(key.to_string())),
        }
        Ok(())
    }

    /// `(key, value)` view in a fixed order, used when embedding the
    /// tolerance set in reports.
    pub fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("herm", self.herm),
            ("trace", self.trace),
            ("cptp", self.cptp),
            ("povm", self.povm),
            ("psd", self.psd),
            ("schmidt", self.schmidt),
            ("eig", self.eig),
            ("margin", self.margin),
        ]
    }
}
