//! Electrons coupled to finitely many truncated phonon modes: the dressing
//! transformation `V = e^{i alpha S}` and numerical certificates for the
//! identities it implies.
//!
//! Every overlap used here (in `R`, in `n~(f)` and in `H_I`) is a discrete sum
//! over the same mode set, so the identities hold mode by mode and the only
//! residual left is the occupation truncation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hubbard::{phase_weights_discrete, CouplingFamily, ElectronGibbs, HubbardSystem, OverlapMatrix, EFFECTIVE_POWER, INFRARED_POWER};
use crate::linalg::{c, frobenius, gibbs, kron, BosonMode, GibbsState, HermitianOperator, Matrix, TruncatedBosonSpace};
use crate::phonon_gas::{momentum_norm, spacing, Dispersion};

pub const DEFAULT_DIMENSION_CAP: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSystem {
    pub hubbard: HubbardSystem,
    /// Mode frequencies `omega_j` and per-site couplings `lambda_x(k_j) w_j^{1/2}`.
    pub modes: Vec<BosonMode>,
    pub chemical_potential: f64,
    pub cutoff: f64,
    pub dimension_cap: usize,
}

impl CoupledSystem {
    pub fn new(hubbard: HubbardSystem, modes: Vec<BosonMode>, chemical_potential: f64, cutoff: f64) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::domain("need at least one phonon mode"));
        }
        for m in &modes {
            if m.couplings.len() != hubbard.num_sites() {
                return Err(Error::DimensionMismatch { expected: hubbard.num_sites(), actual: m.couplings.len() });
            }
            if m.couplings.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::domain("mode couplings must be finite"));
            }
            let eps = m.frequency - chemical_potential;
            if !(eps > 0.0) && m.couplings.iter().any(|z| z.norm() > 0.0) {
                return Err(Error::InfraredDivergence(format!(
                    "coupled mode with energy omega - mu = {eps}; S needs omega^(-1) lambda"
                )));
            }
        }
        Ok(Self { hubbard, modes, chemical_potential, cutoff, dimension_cap: DEFAULT_DIMENSION_CAP })
    }

    /// Modes at lattice momenta `k_j = (2 pi / L) n_j` with couplings
    /// `lambda_x(k_j) (2 pi / L)^{d/2}`, so that mode sums are Riemann sums of
    /// the continuum overlaps.
    pub fn from_lattice(
        hubbard: HubbardSystem,
        family: &CouplingFamily,
        disp: &Dispersion,
        box_size: f64,
        lattice_points: &[Vec<i64>],
    ) -> Result<Self> {
        if family.num_sites() != hubbard.num_sites() {
            return Err(Error::DimensionMismatch { expected: hubbard.num_sites(), actual: family.num_sites() });
        }
        let h = spacing(box_size);
        let weight = h.powf(disp.dim as f64 / 2.0);
        let modes = lattice_points
            .iter()
            .map(|n| {
                if n.len() != disp.dim {
                    return Err(Error::DimensionMismatch { expected: disp.dim, actual: n.len() });
                }
                let k: Vec<f64> = n.iter().map(|&x| h * x as f64).collect();
                let couplings = (0..family.num_sites()).map(|x| family.value(x, &k) * weight).collect();
                Ok(BosonMode { frequency: disp.omega(momentum_norm(&k)), couplings })
            })
            .collect::<Result<_>>()?;
        Self::new(hubbard, modes, disp.chemical_potential, family.cutoff)
    }

    pub fn with_coupling(&self, alpha: f64) -> Self {
        Self { hubbard: self.hubbard.with_coupling(alpha), ..self.clone() }
    }

    pub fn with_hubbard(&self, hubbard: HubbardSystem) -> Self {
        Self { hubbard, ..self.clone() }
    }

    pub fn alpha(&self) -> f64 {
        self.hubbard.coupling()
    }

    pub fn bosons(&self, level_cap: usize) -> Result<TruncatedBosonSpace> {
        TruncatedBosonSpace::new(self.modes.clone(), level_cap)
    }

    /// `R_{-1/2}` from the discrete mode set.
    pub fn effective_overlaps(&self) -> Result<OverlapMatrix> {
        OverlapMatrix::discrete(&self.modes, self.chemical_potential, EFFECTIVE_POWER, self.cutoff)
    }

    /// `R_{-1}` from the discrete mode set.
    pub fn infrared_overlaps(&self) -> Result<OverlapMatrix> {
        OverlapMatrix::discrete(&self.modes, self.chemical_potential, INFRARED_POWER, self.cutoff)
    }

    /// Coupling vector of site `x`, scaled per mode by `scale(eps_j)`.
    fn site_vector(&self, x: usize, scale: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.couplings[x] * scale(m.frequency - self.chemical_potential)).collect()
    }

    /// Boson-number expectation `Tr[N e^{-beta H_b}] / Z_b` on the truncated space.
    pub fn free_boson_number(&self, level_cap: usize) -> Result<f64> {
        let b = self.bosons(level_cap)?;
        let g = gibbs(&b.hamiltonian(self.chemical_potential), self.hubbard.beta())?;
        Ok(g.expectation(b.number().matrix())?.re)
    }
}

/// Dense operators on `H_e (x) F_b` with the fermion factor outermost.
#[derive(Debug, Clone)]
pub struct CoupledOperators {
    pub level_cap: usize,
    pub fermion_dim: usize,
    pub boson_dim: usize,
    /// `H = H_e (x) 1 + 1 (x) H_b + alpha H_I`.
    pub full: HermitianOperator,
    /// `H_fr = H_e (x) 1 + 1 (x) H_b`.
    pub free: HermitianOperator,
    /// `1 (x) H_b`.
    pub boson: HermitianOperator,
    /// `H_I = sum_x n_x (x) phi(lambda_x)`.
    pub interaction: HermitianOperator,
    /// `S = sum_x n_x (x) phi(i eps^{-1} lambda_x)`.
    pub generator: HermitianOperator,
    /// `V = e^{i alpha S}`.
    pub dressing: Matrix,
    /// `R_{-1/2} (x) 1`.
    pub shift: HermitianOperator,
    /// `H~_e (x) 1 + 1 (x) H_b`.
    pub effective: HermitianOperator,
}

impl CoupledOperators {
    pub fn dim(&self) -> usize {
        self.fermion_dim * self.boson_dim
    }

    /// `||V^dagger V - I||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        frobenius(&(self.dressing.adjoint() * &self.dressing - Matrix::identity(n, n)))
    }
}

/// `sum_s |s><s| (x) phi(sum_x n_x(s) g_x)` for site vectors `g_x`.
fn site_field_sum(occupations: &[Vec<f64>], bosons: &TruncatedBosonSpace, vectors: &[Vec<Complex64>]) -> Result<Matrix> {
    let nb = bosons.dim();
    let nf = occupations.len();
    let mut out = Matrix::zeros(nf * nb, nf * nb);
    for (s, occ) in occupations.iter().enumerate() {
        let mut g = vec![c(0.0, 0.0); bosons.num_modes()];
        for (nx, vx) in occ.iter().zip(vectors) {
            for (gj, vj) in g.iter_mut().zip(vx) {
                *gj += vj * *nx;
            }
        }
        let field = bosons.field(&g)?;
        out.view_mut((s * nb, s * nb), (nb, nb)).copy_from(field.matrix());
    }
    Ok(out)
}

pub fn build_coupled_operators(sys: &CoupledSystem, level_cap: usize) -> Result<CoupledOperators> {
    let bosons = sys.bosons(level_cap)?;
    let nf = sys.hubbard.dim();
    let nb = bosons.dim();
    let dim = nf.checked_mul(nb).ok_or(Error::DimensionCap { dim: usize::MAX, cap: sys.dimension_cap })?;
    if dim > sys.dimension_cap {
        return Err(Error::DimensionCap { dim, cap: sys.dimension_cap });
    }
    let alpha = sys.alpha();
    let occupations = sys.hubbard.site_occupations();
    let sites = sys.hubbard.num_sites();

    let he = sys.hubbard.hamiltonian().tensor_identity_right(nb);
    let boson = bosons.hamiltonian(sys.chemical_potential).tensor_identity_left(nf);
    let couplings: Vec<Vec<Complex64>> = (0..sites).map(|x| sys.site_vector(x, |_| c(1.0, 0.0))).collect();
    let interaction = HermitianOperator::new(site_field_sum(&occupations, &bosons, &couplings)?)?;
    let dressed: Vec<Vec<Complex64>> = (0..sites).map(|x| sys.site_vector(x, |eps| c(0.0, 1.0 / eps))).collect();
    let generator = HermitianOperator::new(site_field_sum(&occupations, &bosons, &dressed)?)?;
    let dressing = generator.exp_i(alpha);

    let free = he.add(&boson)?;
    let full = free.add(&interaction.scale(alpha))?;
    let overlaps = sys.effective_overlaps()?;
    let shift = sys.hubbard.density_density(&overlaps)?.tensor_identity_right(nb);
    let effective = sys.hubbard.effective_hamiltonian(&overlaps)?.tensor_identity_right(nb).add(&boson)?;
    Ok(CoupledOperators {
        level_cap,
        fermion_dim: nf,
        boson_dim: nb,
        full,
        free,
        boson,
        interaction,
        generator,
        dressing,
        shift,
        effective,
    })
}

/// Tensor indices whose boson occupations are all `<= cap`.
fn restricted_indices(bosons: &TruncatedBosonSpace, fermion_dim: usize, cap: usize) -> Vec<usize> {
    let inner = bosons.indices_with_occupation_at_most(cap);
    (0..fermion_dim).flat_map(|s| inner.iter().map(move |&b| s * bosons.dim() + b)).collect()
}

fn restrict(m: &Matrix, idx: &[usize]) -> Matrix {
    Matrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressingPoint {
    pub level_cap: usize,
    /// `||P (V H_b V^dagger - H_b - alpha H_I - (alpha^2/2) R) P||_F / ||P (H_b + alpha H_I + (alpha^2/2) R) P||_F`
    /// with `P` projecting on boson occupations `<= level_cap / 2`.
    pub residual: f64,
    pub restricted_dim: usize,
    pub unitarity_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderReport<T> {
    pub points: Vec<T>,
    /// Whether the tracked quantity is nonincreasing along the ladder.
    pub monotone: bool,
}

fn nonincreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

pub fn dressing_residual(sys: &CoupledSystem, level_cap: usize) -> Result<DressingPoint> {
    let ops = build_coupled_operators(sys, level_cap)?;
    let alpha = sys.alpha();
    let lhs = &ops.dressing * ops.boson.matrix() * ops.dressing.adjoint();
    let rhs = ops.boson.matrix() + ops.interaction.matrix() * c(alpha, 0.0) + ops.shift.matrix() * c(0.5 * alpha * alpha, 0.0);
    let idx = restricted_indices(&sys.bosons(level_cap)?, ops.fermion_dim, level_cap / 2);
    let diff = restrict(&(&lhs - &rhs), &idx);
    let scale = frobenius(&restrict(&rhs, &idx));
    let residual = if scale == 0.0 { frobenius(&diff) } else { frobenius(&diff) / scale };
    Ok(DressingPoint { level_cap, residual, restricted_dim: idx.len(), unitarity_defect: ops.unitarity_defect() })
}

/// Dressing-identity residuals along a ladder of level caps.
pub fn verify_dressing_identity(sys: &CoupledSystem, ladder: &[usize]) -> Result<LadderReport<DressingPoint>> {
    let points: Vec<DressingPoint> = ladder.par_iter().map(|&n| dressing_residual(sys, n)).collect::<Result<_>>()?;
    let monotone = nonincreasing(&points.iter().map(|p| p.residual).collect::<Vec<_>>());
    Ok(LadderReport { points, monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub level_cap: usize,
    pub dim: usize,
    /// Lowest eigenvalues of `H`.
    pub coupled: Vec<f64>,
    /// Lowest eigenvalues of `H~_e (x) 1 + 1 (x) H_b`.
    pub decoupled: Vec<f64>,
    pub max_gap: f64,
}

pub fn spectral_comparison(sys: &CoupledSystem, level_cap: usize, levels: usize) -> Result<SpectralPoint> {
    let ops = build_coupled_operators(sys, level_cap)?;
    let a = ops.full.eigh().values_sorted();
    let b = ops.effective.eigh().values_sorted();
    let n = levels.min(a.len());
    let coupled = a[..n].to_vec();
    let decoupled = b[..n].to_vec();
    let max_gap = coupled.iter().zip(&decoupled).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(SpectralPoint { level_cap, dim: ops.dim(), coupled, decoupled, max_gap })
}

/// Low-lying spectra of `H` and the decoupled Hamiltonian along a ladder.
pub fn verify_spectral_equivalence(sys: &CoupledSystem, ladder: &[usize], levels: usize) -> Result<LadderReport<SpectralPoint>> {
    let points: Vec<SpectralPoint> =
        ladder.par_iter().map(|&n| spectral_comparison(sys, n, levels)).collect::<Result<_>>()?;
    let monotone = nonincreasing(&points.iter().map(|p| p.max_gap).collect::<Vec<_>>());
    Ok(LadderReport { points, monotone })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizationPoint {
    pub level_cap: usize,
    /// `psi(A_e (x) W(f))` in the coupled Gibbs state.
    pub lhs: Complex64,
    /// `psi~_e(e^{-i alpha n~(f)} A_e) psi_b(W(f))`.
    pub rhs: Complex64,
    pub gap: f64,
}

/// Gibbs states needed to compare the coupled expectation of `A_e (x) W(f)`
/// with the product of the dressed electron expectation and the free boson
/// value, built once per level cap.
pub struct FactorizationContext<'a> {
    sys: &'a CoupledSystem,
    level_cap: usize,
    bosons: TruncatedBosonSpace,
    coupled: GibbsState,
    free_bosons: GibbsState,
    electrons: ElectronGibbs,
}

impl<'a> FactorizationContext<'a> {
    pub fn new(sys: &'a CoupledSystem, level_cap: usize) -> Result<Self> {
        let ops = build_coupled_operators(sys, level_cap)?;
        let bosons = sys.bosons(level_cap)?;
        let beta = sys.hubbard.beta();
        let coupled = gibbs(&ops.full, beta)?;
        let free_bosons = gibbs(&bosons.hamiltonian(sys.chemical_potential), beta)?;
        let electrons = sys.hubbard.electron_state(&sys.effective_overlaps()?)?;
        Ok(Self { sys, level_cap, bosons, coupled, free_bosons, electrons })
    }

    /// The phase carries `n~(-f)`: conjugating `W(f)` by `V` produces
    /// `e^{-i alpha n~(f)}`.
    pub fn point(&self, a: &Matrix, f: &[Complex64]) -> Result<FactorizationPoint> {
        let nf = self.electrons.dim();
        if a.nrows() != nf || a.ncols() != nf {
            return Err(Error::DimensionMismatch { expected: nf, actual: a.nrows() });
        }
        let weyl = self.bosons.weyl(f)?;
        let lhs = self.coupled.expectation(&kron(a, &weyl))?;
        let minus_f: Vec<Complex64> = f.iter().map(|z| -z).collect();
        let weights = phase_weights_discrete(&self.sys.modes, self.sys.chemical_potential, &minus_f)?;
        let rhs = self.electrons.dressed_phase_expectation(a, &weights)? * self.free_bosons.expectation(&weyl)?;
        Ok(FactorizationPoint { level_cap: self.level_cap, lhs, rhs, gap: (lhs - rhs).norm() })
    }
}

pub fn factorization_point(sys: &CoupledSystem, level_cap: usize, a: &Matrix, f: &[Complex64]) -> Result<FactorizationPoint> {
    FactorizationContext::new(sys, level_cap)?.point(a, f)
}

/// Factorization gaps for every `(A_e, f)` pair along the ladder; one report per pair.
pub fn verify_factorization_batch(
    sys: &CoupledSystem,
    ladder: &[usize],
    pairs: &[(Matrix, Vec<Complex64>)],
) -> Result<Vec<LadderReport<FactorizationPoint>>> {
    let per_level: Vec<Vec<FactorizationPoint>> = ladder
        .par_iter()
        .map(|&n| {
            let ctx = FactorizationContext::new(sys, n)?;
            pairs.iter().map(|(a, f)| ctx.point(a, f)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..pairs.len())
        .map(|i| {
            let points: Vec<FactorizationPoint> = per_level.iter().map(|lv| lv[i]).collect();
            let monotone = nonincreasing(&points.iter().map(|p| p.gap).collect::<Vec<_>>());
            LadderReport { points, monotone }
        })
        .collect())
}

pub fn verify_factorization(
    sys: &CoupledSystem,
    ladder: &[usize],
    a: &Matrix,
    f: &[Complex64],
) -> Result<LadderReport<FactorizationPoint>> {
    let mut reports = verify_factorization_batch(sys, ladder, &[(a.clone(), f.to_vec())])?;
    Ok(reports.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BosonNumberPoint {
    pub level_cap: usize,
    /// `psi(1 (x) N_b)` in the coupled Gibbs state.
    pub coupled: f64,
    /// Free number plus `(alpha^2 / 2) psi~_e(R_{-1})`.
    pub predicted: f64,
    pub gap: f64,
}

/// The coupled phonon number exceeds the free one by the infrared term.
pub fn boson_number_point(sys: &CoupledSystem, level_cap: usize) -> Result<BosonNumberPoint> {
    let ops = build_coupled_operators(sys, level_cap)?;
    let bosons = sys.bosons(level_cap)?;
    let number = bosons.number().tensor_identity_left(ops.fermion_dim);
    let coupled = gibbs(&ops.full, sys.hubbard.beta())?.expectation(number.matrix())?.re;
    let electrons = sys.hubbard.electron_state(&sys.effective_overlaps()?)?;
    let infrared = electrons.infrared_number(&sys.infrared_overlaps()?, 1)?;
    let predicted = sys.free_boson_number(level_cap)? + infrared;
    Ok(BosonNumberPoint { level_cap, coupled, predicted, gap: (coupled - predicted).abs() })
}

/// `|Tr[e^{itH} X e^{-itH} rho] - Tr[X rho]|` for the coupled Gibbs state.
pub fn dynamics_invariance_gap(sys: &CoupledSystem, level_cap: usize, x: &Matrix, t: f64) -> Result<f64> {
    let ops = build_coupled_operators(sys, level_cap)?;
    let state = gibbs(&ops.full, sys.hubbard.beta())?;
    let u = ops.full.exp_i(t);
    let moved = &u * x * u.adjoint();
    Ok((state.expectation(&moved)? - state.expectation(x)?).norm())
}
