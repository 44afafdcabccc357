//! σ-symmetries of perturbed autonomous dynamical systems.
//!
//! A system `ẋ = f(x)` with a Lie algebra of symmetries `X_α = φ_α^i ∂_i` is
//! perturbed to `ẋ = f + F^α φ_α`. The perturbed system keeps the `X_α` as
//! σ-symmetries for `σ_α^β = c^β_{αγ} F^γ + X_α(F^β)`.

use nalgebra::{DMatrix, DVector};
use num_traits::{ToPrimitive, Zero};

use crate::error::{witness_from, Error, Result, Witness};
use crate::expr::{Expr, Rational, Symbol};
use crate::field::{ProlongedField, VectorField};
use crate::jet::{JetSpace, MultiIndex};
use crate::linalg;
use crate::matrix::Matrix;
use crate::oracle::{Oracle, Verdict};
use crate::prolong::{prolong_sigma, prolong_standard};
use crate::symmetry::{is_symmetry, DiffEq};

/// `ẋ^i = f^i(x)`, encoded on a jet space with one independent variable `t`.
#[derive(Clone, Debug)]
pub struct DynamicalSystem {
    space: JetSpace,
    f: Vec<Expr>,
}

fn state_symbol(a: usize) -> Symbol {
    Symbol::jet(a, MultiIndex::ode(0))
}

impl DynamicalSystem {
    pub fn new(space: &JetSpace, f: Vec<Expr>) -> Result<DynamicalSystem> {
        if space.n() != 1 {
            return Err(Error::Precondition("dynamical systems have one time variable".into()));
        }
        if f.len() != space.m() {
            return Err(Error::SizeMismatch(format!("{} components for {} states", f.len(), space.m())));
        }
        for e in &f {
            if e.contains(&Symbol::Indep(0)) {
                return Err(Error::Precondition("only autonomous systems are supported".into()));
            }
            if e.jet_order() > 0 {
                return Err(Error::Precondition("vector field may not depend on derivatives".into()));
            }
        }
        Ok(DynamicalSystem { space: space.with_max_order(space.max_order().max(1)), f })
    }

    pub fn parse(space: &JetSpace, f: &[&str]) -> Result<DynamicalSystem> {
        DynamicalSystem::new(space, f.iter().map(|t| Ok(space.parse(t)?)).collect::<Result<_>>()?)
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    pub fn rhs(&self) -> &[Expr] {
        &self.f
    }

    /// The first-order solved system `u^a_t = f^a`.
    pub fn to_diffeq(&self) -> Result<DiffEq> {
        let leads = (0..self.dim()).map(|a| (a, MultiIndex::ode(1))).collect();
        DiffEq::new(&self.space, leads, self.f.clone())
    }
}

fn state_symbols(space: &JetSpace) -> Vec<Symbol> {
    (0..space.m()).map(state_symbol).collect()
}

/// Finite-dimensional algebra of vertical fields with rational structure
/// constants `[X_α, X_β] = c^γ_{αβ} X_γ`.
#[derive(Clone, Debug)]
pub struct SymmetryAlgebra {
    fields: Vec<VectorField>,
    /// `constants[α][β][γ] = c^γ_{αβ}`.
    constants: Vec<Vec<Vec<Rational>>>,
}

impl SymmetryAlgebra {
    /// Compute and certify the structure constants of `fields`.
    pub fn certify(space: &JetSpace, fields: Vec<VectorField>, oracle: &Oracle) -> Result<SymmetryAlgebra> {
        let constants = fit_structure_constants(space, &fields, oracle)?;
        let alg = SymmetryAlgebra { fields, constants };
        alg.check_identities()?;
        Ok(alg)
    }

    /// Certify declared constants against the fields.
    pub fn with_constants(
        space: &JetSpace,
        fields: Vec<VectorField>,
        constants: Vec<Vec<Vec<Rational>>>,
        oracle: &Oracle,
    ) -> Result<SymmetryAlgebra> {
        let r = fields.len();
        if constants.len() != r || constants.iter().any(|row| row.len() != r || row.iter().any(|c| c.len() != r)) {
            return Err(Error::SizeMismatch(format!("structure constants must be {r}x{r}x{r}")));
        }
        check_vertical(space, &fields)?;
        let alg = SymmetryAlgebra { fields, constants };
        alg.check_identities()?;
        for a in 0..r {
            for b in a + 1..r {
                let v = alg.bracket_verdict(space, a, b, oracle)?;
                if !v.holds {
                    return Err(Error::Precondition(format!(
                        "declared constants do not reproduce [X{}, X{}]",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(alg)
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn constant(&self, alpha: usize, beta: usize, gamma: usize) -> &Rational {
        &self.constants[alpha][beta][gamma]
    }

    pub fn constants(&self) -> &[Vec<Vec<Rational>>] {
        &self.constants
    }

    pub fn is_abelian(&self) -> bool {
        self.constants.iter().flatten().flatten().all(Zero::is_zero)
    }

    fn check_identities(&self) -> Result<()> {
        let r = self.len();
        for a in 0..r {
            for b in 0..r {
                for g in 0..r {
                    if self.constants[a][b][g] != -self.constants[b][a][g].clone() {
                        return Err(Error::Precondition("structure constants are not antisymmetric".into()));
                    }
                }
            }
        }
        // Σ_δ c^δ_{αβ} c^ε_{δγ} + cyclic = 0
        for a in 0..r {
            for b in 0..r {
                for g in 0..r {
                    for e in 0..r {
                        let mut total = Rational::zero();
                        for d in 0..r {
                            total += &self.constants[a][b][d] * &self.constants[d][g][e];
                            total += &self.constants[b][g][d] * &self.constants[d][a][e];
                            total += &self.constants[g][a][d] * &self.constants[d][b][e];
                        }
                        if !total.is_zero() {
                            return Err(Error::Precondition("structure constants violate the Jacobi identity".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn bracket_verdict(&self, space: &JetSpace, a: usize, b: usize, oracle: &Oracle) -> Result<Verdict> {
        let bracket = self.fields[a].commutator(&self.fields[b]);
        let coeffs: Vec<Expr> = (0..self.len()).map(|g| Expr::constant(self.constants[a][b][g].clone())).collect();
        let combo = VectorField::combination(space, &coeffs, &self.fields);
        let residuals: Vec<Expr> = bracket.phi().iter().zip(combo.phi()).map(|(p, q)| (p - q).expand()).collect();
        oracle.check_zero(&residuals)
    }
}

fn check_vertical(space: &JetSpace, fields: &[VectorField]) -> Result<()> {
    if space.n() != 1 {
        return Err(Error::Precondition("dynamical systems have one time variable".into()));
    }
    for f in fields {
        if !f.is_vertical() || f.phi().iter().any(|p| p.contains(&Symbol::Indep(0))) {
            return Err(Error::Precondition("algebra fields must be time-independent and have no ∂_t part".into()));
        }
    }
    Ok(())
}

/// Least-squares fit of `[X_α, X_β]` against the `X_γ` over stacked sample
/// values, rationalized and then certified by the oracle.
fn fit_structure_constants(space: &JetSpace, fields: &[VectorField], oracle: &Oracle) -> Result<Vec<Vec<Vec<Rational>>>> {
    check_vertical(space, fields)?;
    let r = fields.len();
    let d = space.m();
    let mut constants = vec![vec![vec![Rational::zero(); r]; r]; r];
    if r == 0 {
        return Ok(constants);
    }
    let brackets: Vec<(usize, usize, VectorField)> = (0..r)
        .flat_map(|a| (a + 1..r).map(move |b| (a, b)))
        .map(|(a, b)| (a, b, fields[a].commutator(&fields[b])))
        .collect();
    let mut all: Vec<Expr> = fields.iter().flat_map(|f| f.phi().to_vec()).collect();
    all.extend(brackets.iter().flat_map(|b| b.2.phi().to_vec()));
    let count = (2 * r).max(12);
    let points = oracle.sample_points(&all, &state_symbols(space), count)?;
    let stack = |f: &VectorField| -> Vec<f64> {
        points.iter().flat_map(|p| f.phi().iter().map(move |e| e.eval(p).unwrap_or(f64::NAN))).collect()
    };
    let basis = DMatrix::from_fn(count * d, r, {
        let cols: Vec<Vec<f64>> = fields.iter().map(stack).collect();
        move |i, j| cols[j][i]
    });
    if linalg::numeric_rank(&basis, 1e-9) < r {
        return Err(Error::Precondition("algebra fields are linearly dependent over the constants".into()));
    }
    let svd = basis.svd(true, true);
    for (a, b, br) in &brackets {
        let target = DVector::from_vec(stack(br));
        let sol = svd.solve(&target, 1e-12).map_err(|_| Error::IllConditioned)?;
        for g in 0..r {
            let c = linalg::rationalize(sol[g], 12, 1e-6).ok_or_else(|| {
                Error::Precondition(format!("[X{}, X{}] has no rational coordinates in the algebra", a + 1, b + 1))
            })?;
            constants[*b][*a][g] = -c.clone();
            constants[*a][*b][g] = c;
        }
    }
    let alg = SymmetryAlgebra { fields: fields.to_vec(), constants };
    for (a, b, _) in &brackets {
        if !alg.bracket_verdict(space, *a, *b, oracle)?.holds {
            return Err(Error::Precondition(format!("[X{}, X{}] leaves the algebra", a + 1, b + 1)));
        }
    }
    Ok(alg.constants)
}

/// Coefficients `F^α(x)` of a perturbation along the algebra.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub coefficients: Vec<Expr>,
}

impl Perturbation {
    pub fn new(coefficients: Vec<Expr>) -> Result<Perturbation> {
        if coefficients.iter().any(|e| e.jet_order() > 0 || e.contains(&Symbol::Indep(0))) {
            return Err(Error::Precondition("perturbation coefficients must be functions of the state".into()));
        }
        Ok(Perturbation { coefficients })
    }

    pub fn zero(r: usize) -> Perturbation {
        Perturbation { coefficients: vec![Expr::zero(); r] }
    }
}

fn sizes_match(alg: &SymmetryAlgebra, f: &Perturbation) -> Result<()> {
    if alg.len() != f.coefficients.len() {
        return Err(Error::SizeMismatch(format!("{} perturbation coefficients for {} fields", f.coefficients.len(), alg.len())));
    }
    Ok(())
}

/// `σ_α^β = c^β_{αγ} F^γ + X_α(F^β)`.
pub fn sigma_from_perturbation(alg: &SymmetryAlgebra, f: &Perturbation) -> Result<Matrix> {
    sizes_match(alg, f)?;
    let r = alg.len();
    let mut sigma = Matrix::zeros(r, r);
    for a in 0..r {
        for b in 0..r {
            let mut terms = vec![alg.fields[a].apply(&f.coefficients[b])];
            for g in 0..r {
                let c = alg.constant(a, g, b);
                if !c.is_zero() {
                    terms.push(&Expr::constant(c.clone()) * &f.coefficients[g]);
                }
            }
            sigma.set(a, b, Expr::sum(terms).expand());
        }
    }
    Ok(sigma)
}

/// `g = f + Σ_α F^α φ_α`.
pub fn perturbed_system(ds: &DynamicalSystem, alg: &SymmetryAlgebra, f: &Perturbation) -> Result<DynamicalSystem> {
    sizes_match(alg, f)?;
    let g = (0..ds.dim())
        .map(|i| {
            let mut terms = vec![ds.f[i].clone()];
            for (x, c) in alg.fields.iter().zip(&f.coefficients) {
                terms.push(c * &x.phi()[i]);
            }
            Expr::sum(terms).expand()
        })
        .collect();
    DynamicalSystem::new(&ds.space, g)
}

/// Certified outcome of one claim.
#[derive(Clone, Debug)]
pub struct Claim {
    pub holds: bool,
    pub max_residual: f64,
    pub witness: Witness,
}

impl Claim {
    fn from_verdicts(verdicts: &[Verdict], space: &JetSpace) -> Claim {
        let max_residual = verdicts.iter().map(|v| v.max_residual).fold(0.0, f64::max);
        let failed = verdicts.iter().find(|v| !v.holds);
        Claim {
            holds: failed.is_none(),
            max_residual,
            witness: failed
                .and_then(|v| v.failure.as_ref())
                .map(|f| witness_from(&f.point, Some(space)))
                .unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PerturbationReport {
    pub sigma: Matrix,
    pub perturbed: DynamicalSystem,
    /// `[Y_α, Y_β] ≡ c^γ_{αβ} Y_γ` for the σ-prolonged fields.
    pub involution: Claim,
    /// σ-prolonged fields are symmetries of the perturbed system.
    pub tangency: Claim,
    /// Standard prolongations fail tangency unless σ vanishes.
    pub control: Claim,
    pub sigma_vanishes: bool,
}

impl PerturbationReport {
    pub fn passed(&self) -> bool {
        self.involution.holds && self.tangency.holds && self.control.holds
    }
}

/// Full σ-symmetry report for the perturbed system with σ built from the
/// structure constants and the perturbation.
pub fn verify_sigma_perturbation(
    ds: &DynamicalSystem,
    alg: &SymmetryAlgebra,
    f: &Perturbation,
    k: usize,
    oracle: &Oracle,
) -> Result<PerturbationReport> {
    let sigma = sigma_from_perturbation(alg, f)?;
    verify_sigma_perturbation_with(ds, alg, f, &sigma, k, oracle)
}

/// As [`verify_sigma_perturbation`] but with a caller-supplied σ, for negative controls.
pub fn verify_sigma_perturbation_with(
    ds: &DynamicalSystem,
    alg: &SymmetryAlgebra,
    f: &Perturbation,
    sigma: &Matrix,
    k: usize,
    oracle: &Oracle,
) -> Result<PerturbationReport> {
    if k == 0 {
        return Err(Error::Precondition("prolongation order must be at least 1".into()));
    }
    if alg.fields.iter().any(|x| x.phi().len() != ds.dim()) {
        return Err(Error::SizeMismatch("algebra fields and system differ in dimension".into()));
    }
    let space = ds.space.with_max_order(ds.space.max_order().max(k));
    let base_eq = ds.to_diffeq()?;
    for (a, x) in alg.fields.iter().enumerate() {
        if !is_symmetry(&base_eq, &prolong_standard(x, 1, &space)?, oracle)?.holds {
            return Err(Error::Precondition(format!("X{} is not a symmetry of the unperturbed system", a + 1)));
        }
    }
    let perturbed = perturbed_system(ds, alg, f)?;
    let eq = DiffEq::new(&space, (0..ds.dim()).map(|a| (a, MultiIndex::ode(1))).collect(), perturbed.f.clone())?;
    let r = alg.len();

    let ys = prolong_sigma(&alg.fields, sigma, k, &space)?;
    let mut inv = Vec::new();
    for a in 0..r {
        for b in a + 1..r {
            let coeffs: Vec<Expr> = (0..r).map(|g| Expr::constant(alg.constant(a, b, g).clone())).collect();
            let diff = ys[a].commutator(&ys[b])?.sub(&ProlongedField::combination(&coeffs, &ys)?)?;
            let residuals: Vec<Expr> = diff.coefficients().into_iter().map(|c| c.1.tidy()).collect();
            inv.push(oracle.check_zero(&residuals)?);
        }
    }
    let tangent: Vec<Verdict> = ys.iter().map(|y| is_symmetry(&eq, y, oracle)).collect::<Result<_>>()?;

    let sigma_vanishes = oracle.check_zero(sigma.entries())?.holds;
    let standard: Vec<Verdict> = alg
        .fields
        .iter()
        .map(|x| is_symmetry(&eq, &prolong_standard(x, k, &space)?, oracle))
        .collect::<Result<_>>()?;
    let standard_claim = Claim::from_verdicts(&standard, &space);
    let control = Claim {
        holds: standard_claim.holds == sigma_vanishes,
        max_residual: standard_claim.max_residual,
        witness: standard
            .iter()
            .find_map(|v| v.failure.as_ref())
            .map(|f| witness_from(&f.point, Some(&space)))
            .unwrap_or_default(),
    };
    Ok(PerturbationReport {
        sigma: sigma.clone(),
        perturbed,
        involution: Claim::from_verdicts(&inv, &space),
        tangency: Claim::from_verdicts(&tangent, &space),
        control,
        sigma_vanishes,
    })
}

/// Linear system `ẋ = A x` with diagonal `A`, the commutant algebra of `A`
/// and the generators of its polynomial invariants.
#[derive(Clone, Debug)]
pub struct NormalFormInstance {
    pub system: DynamicalSystem,
    pub algebra: SymmetryAlgebra,
    /// `(i, j)` for each algebra field `x_j ∂_i`.
    pub matrix_units: Vec<(usize, usize)>,
    /// Coordinates of the linear part `A` itself in the algebra.
    pub linear_part: Vec<Rational>,
    /// Minimal resonant monomials, or `[1]` when there are none.
    pub generators: Vec<Expr>,
    /// Exponent vectors of the generators (empty for the constant).
    pub exponents: Vec<Vec<usize>>,
}

pub const DEFAULT_DEGREE_BOUND: usize = 6;

fn state_names(d: usize) -> Vec<String> {
    match d {
        1 => vec!["x".into()],
        2 => vec!["x".into(), "y".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        _ => (1..=d).map(|i| format!("x{i}")).collect(),
    }
}

fn exponent_vectors(d: usize, total: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .rev()
        .flat_map(|first| {
            exponent_vectors(d - 1, total - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Normal-form instance for `A = diag(eigenvalues)`.
pub fn normal_form_instance(a: &Matrix, degree_bound: usize, oracle: &Oracle) -> Result<NormalFormInstance> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::Precondition("linear part must be a nonempty square matrix".into()));
    }
    let d = a.rows();
    let mut eig = Vec::with_capacity(d);
    for i in 0..d {
        for j in 0..d {
            let c = a.get(i, j).as_const().cloned();
            match c {
                None => return Err(Error::Precondition("linear part must have rational entries".into())),
                Some(c) if i != j && !c.is_zero() => {
                    return Err(Error::Precondition("linear part must be diagonal".into()))
                }
                Some(c) if i == j => eig.push(c),
                _ => {}
            }
        }
    }
    let names = state_names(d);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let space = JetSpace::new(&["t"], &refs, 1)?;
    let system = DynamicalSystem::new(&space, (0..d).map(|i| &Expr::constant(eig[i].clone()) * &space.u(i)).collect())?;

    let mut matrix_units = Vec::new();
    let mut fields = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if eig[i] == eig[j] {
                let mut phi = vec![Expr::zero(); d];
                phi[i] = space.u(j);
                fields.push(VectorField::vertical(&space, phi)?);
                matrix_units.push((i, j));
            }
        }
    }
    let linear_part = matrix_units
        .iter()
        .map(|&(i, j)| if i == j { eig[i].clone() } else { Rational::zero() })
        .collect();
    let algebra = SymmetryAlgebra::certify(&space, fields, oracle)?;

    let mut exponents: Vec<Vec<usize>> = Vec::new();
    for total in 1..=degree_bound {
        for k in exponent_vectors(d, total) {
            let weight: Rational = k.iter().zip(&eig).map(|(ki, l)| Rational::from_integer((*ki).into()) * l).sum();
            if !weight.is_zero() {
                continue;
            }
            let divisible = exponents.iter().any(|g| g.iter().zip(&k).all(|(a, b)| a <= b));
            if !divisible {
                exponents.push(k);
            }
        }
    }
    let generators = if exponents.is_empty() {
        vec![Expr::one()]
    } else {
        exponents
            .iter()
            .map(|k| Expr::product(k.iter().enumerate().map(|(i, &p)| space.u(i).powi(p as i64))))
            .collect()
    };
    Ok(NormalFormInstance { system, algebra, matrix_units, linear_part, generators, exponents })
}

/// `|c|` of every structure constant as a float, for reports.
pub fn constants_as_f64(alg: &SymmetryAlgebra) -> Vec<Vec<Vec<f64>>> {
    alg.constants
        .iter()
        .map(|m| m.iter().map(|v| v.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    fn plane() -> JetSpace {
        JetSpace::new(&["t"], &["x", "y"], 1).unwrap()
    }

    fn fields(s: &JetSpace, comps: &[[&str; 2]]) -> Vec<VectorField> {
        comps.iter().map(|c| VectorField::parse(s, &["0"], c).unwrap()).collect()
    }

    fn saddle() -> (JetSpace, DynamicalSystem, SymmetryAlgebra) {
        let s = plane();
        let ds = DynamicalSystem::parse(&s, &["x", "-y"]).unwrap();
        let alg = SymmetryAlgebra::certify(&s, fields(&s, &[["x", "0"], ["0", "y"]]), &Oracle::default()).unwrap();
        (s, ds, alg)
    }

    #[test]
    fn structure_constants_of_affine_line() {
        let s = JetSpace::new(&["t"], &["x"], 1).unwrap();
        let fs = vec![VectorField::parse(&s, &["0"], &["1"]).unwrap(), VectorField::parse(&s, &["0"], &["x"]).unwrap()];
        let alg = SymmetryAlgebra::certify(&s, fs.clone(), &Oracle::default()).unwrap();
        assert_eq!(alg.constant(0, 1, 0), &rat(1, 1));
        assert_eq!(alg.constant(1, 0, 0), &rat(-1, 1));
        assert!(alg.constant(0, 1, 1).is_zero());
        let wrong = vec![vec![vec![rat(0, 1); 2]; 2]; 2];
        assert!(SymmetryAlgebra::with_constants(&s, fs, wrong, &Oracle::default()).is_err());
    }

    #[test]
    fn sigma_examples() {
        let s = JetSpace::new(&["t"], &["x"], 1).unwrap();
        let o = Oracle::default();
        let fs = vec![VectorField::parse(&s, &["0"], &["1"]).unwrap(), VectorField::parse(&s, &["0"], &["x"]).unwrap()];
        let alg = SymmetryAlgebra::certify(&s, fs, &o).unwrap();
        let f = Perturbation::new(vec![s.u(0), s.parse("x^2").unwrap()]).unwrap();
        let sigma = sigma_from_perturbation(&alg, &f).unwrap();
        // index-by-index: σ_1^1 = c^1_{12} F² + ∂_x(x) = x² + 1, σ_1^2 = ∂_x(x²) = 2x,
        // σ_2^1 = c^1_{21} F¹ + x ∂_x(x) = −x + x = 0, σ_2^2 = x ∂_x(x²) = 2x²
        let expect = ["x^2 + 1", "2*x", "0", "2*x^2"];
        for (e, want) in sigma.entries().iter().zip(expect) {
            assert!(o.equal(e, &s.parse(want).unwrap()).unwrap());
        }
        let (_, _, abelian) = saddle();
        assert!(sigma_from_perturbation(&abelian, &Perturbation::new(vec![Expr::integer(2), Expr::one()]).unwrap())
            .unwrap()
            .entries()
            .iter()
            .all(Expr::is_zero));
    }

    #[test]
    fn perturbed_system_examples() {
        let (s, ds, _) = saddle();
        let o = Oracle::default();
        let scaling = SymmetryAlgebra::certify(&s, fields(&s, &[["x", "y"]]), &o).unwrap();
        let g = perturbed_system(&ds, &scaling, &Perturbation::new(vec![s.parse("x*y").unwrap()]).unwrap()).unwrap();
        assert!(o.equal(&g.rhs()[0], &s.parse("x + x^2*y").unwrap()).unwrap());
        assert!(o.equal(&g.rhs()[1], &s.parse("-y + x*y^2").unwrap()).unwrap());
        let same = perturbed_system(&ds, &scaling, &Perturbation::zero(1)).unwrap();
        assert_eq!(same.rhs(), ds.rhs());
    }

    #[test]
    fn saddle_report_passes() {
        let (s, ds, alg) = saddle();
        let o = Oracle::default();
        let xy = s.parse("x*y").unwrap();
        let f = Perturbation::new(vec![xy.clone(), &xy * &xy]).unwrap();
        let report = verify_sigma_perturbation(&ds, &alg, &f, 3, &o).unwrap();
        assert!(report.passed(), "{report:?}");
        let wrong = verify_sigma_perturbation_with(&ds, &alg, &f, &report.sigma.transpose(), 3, &o).unwrap();
        assert!(!wrong.tangency.holds && !wrong.tangency.witness.is_empty());
        let unperturbed = verify_sigma_perturbation(&ds, &alg, &Perturbation::zero(2), 2, &o).unwrap();
        assert!(unperturbed.passed() && unperturbed.sigma_vanishes);
    }

    #[test]
    fn non_symmetry_is_a_precondition_failure() {
        let s = plane();
        let ds = DynamicalSystem::parse(&s, &["x", "-y"]).unwrap();
        let alg = SymmetryAlgebra::certify(&s, fields(&s, &[["1", "0"]]), &Oracle::default()).unwrap();
        let r = verify_sigma_perturbation(&ds, &alg, &Perturbation::zero(1), 1, &Oracle::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn normal_form_examples() {
        let o = Oracle::default();
        let nf = normal_form_instance(&Matrix::from_i64(&[&[1, 0], &[0, -1]]), 4, &o).unwrap();
        let s = nf.system.space().clone();
        assert_eq!(nf.generators, vec![s.parse("x*y").unwrap()]);
        assert_eq!(nf.algebra.len(), 2);
        assert!(nf.algebra.is_abelian());
        assert_eq!(nf.linear_part, vec![rat(1, 1), rat(-1, 1)]);
        let none = normal_form_instance(&Matrix::from_i64(&[&[1, 0], &[0, 2]]), 3, &o).unwrap();
        assert_eq!(none.generators, vec![Expr::one()]);
        let gl2 = normal_form_instance(&Matrix::identity(2), 2, &o).unwrap();
        assert_eq!(gl2.algebra.len(), 4);
        assert!(!gl2.algebra.is_abelian());
        assert!(normal_form_instance(&Matrix::from_i64(&[&[1, 1], &[0, 1]]), 2, &o).is_err());
    }

    #[test]
    fn resonances_are_minimal() {
        let nf = normal_form_instance(&Matrix::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, -2]]), 6, &Oracle::default()).unwrap();
        assert_eq!(nf.exponents, vec![vec![2, 0, 1], vec![1, 1, 1], vec![0, 2, 1]]);
    }
}
