//! One function per problem-file operation.

use jetsym::dynsys::{normal_form_instance, verify_sigma_perturbation, Claim, Perturbation, SymmetryAlgebra};
use jetsym::gauge::{verify_gauge_diagram_mu, verify_gauge_diagram_sigma};
use jetsym::invariants::{generate_invariant_chain, reduce_ode};
use jetsym::prolong::{mch_verdict, prolong, prolong_sigma, TwistData};
use jetsym::symmetry::{is_symmetry, solve_determining_ansatz, strong_symmetry_residual, AnsatzProblem, DiffEq};
use jetsym::variational::{
    check_mu_conservation, check_solvable_pair, check_variational_lambda_symmetry, euler_lagrange, noether_flux,
    noether_identity_residual, verify_noether_potential,
};
use jetsym::{Error, Expr, JetSpace, Matrix, Oracle, ProlongedField, Symbol, VectorField};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::problem::{InputError, Problem};
use crate::report::ClaimReport;

pub enum OpError {
    Input(InputError),
    Engine(Error),
}

impl From<InputError> for OpError {
    fn from(e: InputError) -> Self {
        OpError::Input(e)
    }
}

impl From<Error> for OpError {
    fn from(e: Error) -> Self {
        OpError::Engine(e)
    }
}

#[derive(Default)]
pub struct Outcome {
    pub claims: Vec<ClaimReport>,
    pub result: Value,
}

pub const OPERATIONS: &[&str] = &[
    "prolong",
    "mch",
    "check-symmetry",
    "solve-ansatz",
    "invariants",
    "reduce",
    "gauge-verify",
    "variational",
    "dynsys",
];

pub fn dispatch(op: &str, p: &Problem, args: &Value, oracle: &Oracle) -> Result<Outcome, OpError> {
    match op {
        "prolong" => op_prolong(p, &p.args(args)?),
        "mch" => op_mch(p, &p.args(args)?, oracle),
        "check-symmetry" => op_check_symmetry(p, &p.args(args)?, oracle),
        "solve-ansatz" => op_solve_ansatz(p, &p.args(args)?, oracle),
        "invariants" => op_invariants(p, &p.args(args)?, oracle),
        "reduce" => op_reduce(p, &p.args(args)?, oracle),
        "gauge-verify" => op_gauge_verify(p, &p.args(args)?, oracle),
        "variational" => op_variational(p, &p.args(args)?, oracle),
        "dynsys" => op_dynsys(p, &p.args(args)?, oracle),
        other => Err(p.error("op", format!("unknown operation `{other}`")).into()),
    }
}

fn render_prolonged(v: &ProlongedField, space: &JetSpace) -> Value {
    let xi: Vec<String> = v.xi().iter().map(|e| space.render(e)).collect();
    let psi: Vec<Value> = v.render(space).into_iter().map(|(c, e)| json!({ "coordinate": c, "value": e })).collect();
    json!({ "xi": xi, "psi": psi })
}

fn render_matrix(m: &Matrix, space: &JetSpace) -> Vec<Vec<String>> {
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| space.render(m.get(r, c))).collect()).collect()
}

fn render_equation(eq: &DiffEq) -> Vec<String> {
    let s = eq.space();
    eq.leads()
        .iter()
        .zip(eq.rhs())
        .map(|((a, j), rhs)| format!("{} = {}", s.symbol_name(&Symbol::jet(*a, j.clone())), s.render(rhs)))
        .collect()
}

/// One field, or a family when the twist is σ.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProlongArgs {
    #[serde(default)]
    field: Option<String>,
    #[serde(default)]
    fields: Vec<String>,
    #[serde(default)]
    twist: Option<String>,
    order: usize,
}

fn targets(p: &Problem, field: &Option<String>, fields: &[String]) -> Result<Vec<VectorField>, InputError> {
    match field {
        Some(f) => Ok(vec![p.field(f)?.clone()]),
        None if !fields.is_empty() => p.field_list(fields),
        None => Err(p.error("args", "need `field` or `fields`")),
    }
}

fn twist_or_none(p: &Problem, name: &Option<String>) -> Result<TwistData, InputError> {
    Ok(match name {
        Some(n) => p.twist(n)?.clone(),
        None => TwistData::None,
    })
}

/// Prolong every target field; σ prolongs the family jointly.
fn prolong_all(xs: &[VectorField], twist: &TwistData, k: usize, space: &JetSpace) -> Result<Vec<ProlongedField>, Error> {
    match twist {
        TwistData::Sigma(s) => prolong_sigma(xs, s, k, space),
        _ => xs.iter().map(|x| prolong(x, twist, k, space)).collect(),
    }
}

fn op_prolong(p: &Problem, a: &ProlongArgs) -> Result<Outcome, OpError> {
    let xs = targets(p, &a.field, &a.fields)?;
    let twist = twist_or_none(p, &a.twist)?;
    let vs = prolong_all(&xs, &twist, a.order, &p.space)?;
    let fields: Vec<Value> = vs.iter().map(|v| render_prolonged(v, &p.space)).collect();
    Ok(Outcome { claims: Vec::new(), result: json!({ "order": a.order, "fields": fields }) })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MchArgs {
    twist: String,
}

fn op_mch(p: &Problem, a: &MchArgs, oracle: &Oracle) -> Result<Outcome, OpError> {
    let TwistData::Mu(lams) = p.twist(&a.twist)? else {
        return Err(p.error(&a.twist, "mch needs a μ twist").into());
    };
    let mut claims = Vec::new();
    let mut residuals = Vec::new();
    for (r, v) in mch_verdict(lams, &p.space, oracle)? {
        let label = format!("flat({},{})", p.space.indep_names()[r.i], p.space.indep_names()[r.j]);
        residuals.push(json!({ "directions": [r.i, r.j], "residual": render_matrix(&r.residual, &p.space) }));
        claims.push(ClaimReport::from_verdict(label, &v, &p.space));
    }
    Ok(Outcome { claims, result: json!({ "residuals": residuals }) })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SymmetryArgs {
    equation: String,
    #[serde(default)]
    field: Option<String>,
    #[serde(default)]
    fields: Vec<String>,
    #[serde(default)]
    twist: Option<String>,
    #[serde(default)]
    strong: bool,
}

fn op_check_symmetry(p: &Problem, a: &SymmetryArgs, oracle: &Oracle) -> Result<Outcome, OpError> {
    let eq = p.equation(&a.equation)?;
    let xs = targets(p, &a.field, &a.fields)?;
    let twist = twist_or_none(p, &a.twist)?;
    let vs = prolong_all(&xs, &twist, eq.order(), &p.space)?;
    let mut claims = Vec::new();
    for (i, v) in vs.iter().enumerate() {
        let label = if vs.len() == 1 { "symmetry".to_string() } else { format!("symmetry[{i}]") };
        claims.push(ClaimReport::from_verdict(&label, &is_symmetry(eq, v, oracle)?, &p.space));
        if a.strong {
            let strong = oracle.check_zero(&strong_symmetry_residual(eq, v))?;
            claims.push(ClaimReport::from_verdict(format!("strong {label}"), &strong, &p.space));
        }
    }
    Ok(Outcome { claims, result: json!({ "equation": render_equation(eq) }) })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnsatzArgs {
    equation: String,
    #[serde(default)]
    degree: Option<usize>,
    #[serde(default)]
    candidates: Vec<String>,
    #[serde(default)]
    twist: Option<String>,
}

fn op_solve_ansatz(p: &Problem, a: &AnsatzArgs, oracle: &Oracle) -> Result<Outcome, OpError> {
    let eq = p.equation(&a.equation)?;
    let problem = match (a.degree, a.candidates.is_empty()) {
        (Some(d), true) => AnsatzProblem::polynomial(&p.space, d)?,
        (None, false) => AnsatzProblem::from_fields(p.field_list(&a.candidates)?),
        _ => return Err(p.error("args", "give exactly one of `degree` and `candidates`").into()),
    };
    let twist = twist_or_none(p, &a.twist)?;
    let sol = solve_determining_ansatz(eq, &problem, &twist, oracle)?;
    let claims = sol
        .verdicts
        .iter()
        .enumerate()
        .map(|(i, v)| ClaimReport::from_verdict(format!("basis[{i}] re-certified"), v, &p.space))
        .collect();
    let basis: Vec<Value> = sol
        .fields
        .iter()
        .zip(&sol.exact)
        .map(|(f, exact)| json!({ "field": f.render(&p.space), "exact": exact }))
        .collect();
    Ok(Outcome { claims, result: json!({ "candidates": problem.len(), "dimension": sol.dim(), "basis": basis }) })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InvariantArgs {
    #[serde(default)]
    field: Option<String>,
    #[serde(default)]
    fields: Vec<String>,
    #[serde(default)]
    twist: Option<String>,
    eta: String,
    zeta: String,
    target: usize,
}

fn op_invariants(p: &Problem, a: &InvariantArgs, oracle: &Oracle) -> Result<Outcome, OpError> {
    let xs = targets(p, &a.field, &a.fields)?;
    let twist = twist_or_none(p, &a.twist)?;
    let vs = prolong_all(&xs, &twist, a.target, &p.space)?;
    let eta = p.expr("eta", &a.eta)?;
    let zeta = p.expr("zeta", &a.zeta)?;
    match generate_invariant_chain(&vs, &eta, &zeta, a.target, &p.space, oracle) {
        Ok(chain) => {
            let start = zeta.jet_order().max(eta.jet_order()) + 1;
            let claims = chain
                .verdicts
                .iter()
                .enumerate()
                .map(|(i, v)| ClaimReport::from_verdict(format!("invariant at order {}", start + i), v, &p.space))
                .collect();
            let elements: Vec<String> = chain.elements().iter().map(|e| p.space.render(e)).collect();
            Ok(Outcome { claims, result: json!({ "base": p.space.render(&chain.base), "chain": elements }) })
        }
        Err(Error::IbdpViolation { order, residual, witness }) => Ok(Outcome {
            claims: vec![ClaimReport::new(format!("invariant at order {order}"), false, residual).with_witness(&witness)],
            result: json!({ "violation_order": order }),
        }),
        Err(e) => Err(e.into()),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReduceArgs {
    equation: String,
    eta: String,
    zeta: String,
}

fn op_reduce(p: &Problem, a: &ReduceArgs, oracle: &Oracle) -> Result<Outcome, OpError> {
    let eq = p.equation(&a.equation)?;
    let red = reduce_ode(eq, &p.expr("eta", &a.eta)?, &p.expr("zeta", &a.zeta)?, oracle)?;
    let subs: Vec<String> = red.substitution.iter().map(|e| p.space.render(e)).collect();
    Ok(Outcome {
        claims: vec![ClaimReport::from_verdict("pullback vanishes on solutions", &red.pullback, &p.space)],
        result: json!({
            "y": p.space.render(&red.y),
            "w": p.space.render(&red.w),
            "reduced": render_equation(&red.reduced),
            "substitution": subs,
        }),
    })
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum GaugeKind {
    Mu,
    Sigma,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaugeArgs {
    kind: GaugeKind,
    #[serde(default)]
    field: Option<String>,
    #[serde(default)]
    fields: Vec<String>,
    matrix: String,
    order: usize,
}

fn op_gauge_verify(p: &Problem, a: &GaugeArgs, oracle: &Oracle) -> Result<Outcome, OpError> {
    let xs = targets(p, &a.field, &a.fields)?;
    let m = p.matrix(&a.matrix)?;
    let report = match a.kind {
        GaugeKind::Mu => {
            let [x] = xs.as_slice() else {
                return Err(p.error("args", "the μ diagram takes one field").into());
            };
            verify_gauge_diagram_mu(x, m, a.order, &p.space, oracle)?
        }
        GaugeKind::Sigma => verify_gauge_diagram_sigma(&xs, m, a.order, &p.space, oracle)?,
    };
    let failing: Vec<&String> = report
        .verdict
        .failure
        .as_ref()
        .map(|f| vec![&report.labels[f.pair]])
        .unwrap_or_default();
    Ok(Outcome {
        claims: vec![ClaimReport::from_verdict("diagram commutes", &report.verdict, &p.space)],
        result: json!({ "coefficients": report.labels.len(), "first_failure": failing }),
    })
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case")]
enum VariationalCheck {
    EulerLagrange,
    Symmetry,
    Noether,
    MuConservation,
    SolvablePair,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VariationalArgs {
    check: VariationalCheck,
    lagrangian: Option<String>,
    field: Option<String>,
    #[serde(default)]
    lambda: Option<String>,
    #[serde(default)]
    flux: Option<String>,
    #[serde(default)]
    potential: Option<String>,
    /// Constant or base-dependent matrix for μ-conservation.
    #[serde(default)]
    matrix: Option<String>,
    #[serde(default)]
    field2: Option<String>,
    #[serde(default)]
    lambda2: Option<String>,
    #[serde(default)]
    order: Option<usize>,
}

fn op_variational(p: &Problem, a: &VariationalArgs, oracle: &Oracle) -> Result<Outcome, OpError> {
    let s = &p.space;
    let opt_expr = |name: &str, v: &Option<String>| -> Result<Expr, InputError> {
        v.as_deref().map(|t| p.expr(name, t)).transpose().map(|e| e.unwrap_or_else(Expr::zero))
    };
    let need = |v: &Option<String>, what: &str| v.clone().ok_or_else(|| p.error("args", format!("missing `{what}`")));
    let lambda = opt_expr("lambda", &a.lambda)?;
    match a.check {
        VariationalCheck::EulerLagrange => {
            let l = p.lagrangian(&need(&a.lagrangian, "lagrangian")?)?;
            let eqs: Vec<String> = euler_lagrange(l, s)?.iter().map(|e| s.render(e)).collect();
            Ok(Outcome { claims: Vec::new(), result: json!({ "euler_lagrange": eqs }) })
        }
        VariationalCheck::Symmetry => {
            let l = p.lagrangian(&need(&a.lagrangian, "lagrangian")?)?;
            let x = p.field(&need(&a.field, "field")?)?;
            let flux = opt_expr("flux", &a.flux)?;
            let v = check_variational_lambda_symmetry(x, &lambda, l, &flux, s, oracle)?;
            Ok(Outcome { claims: vec![ClaimReport::from_verdict("variational symmetry", &v, s)], result: Value::Null })
        }
        VariationalCheck::Noether => {
            let l = p.lagrangian(&need(&a.lagrangian, "lagrangian")?)?;
            let x = p.field(&need(&a.field, "field")?)?;
            let flux = noether_flux(x, &lambda, l, s)?;
            let identity = oracle.check_zero(&[noether_identity_residual(x, &lambda, l, &flux, s)?])?;
            let mut claims = vec![ClaimReport::from_verdict("Noether identity", &identity, s)];
            if let Some(pot) = &a.potential {
                let v = verify_noether_potential(x, &lambda, l, &p.expr("potential", pot)?, s, oracle)?;
                claims.push(ClaimReport::from_verdict("potential", &v, s));
            }
            Ok(Outcome { claims, result: json!({ "flux": s.render(&flux) }) })
        }
        VariationalCheck::MuConservation => {
            let l = p.lagrangian(&need(&a.lagrangian, "lagrangian")?)?;
            let x = p.field(&need(&a.field, "field")?)?;
            let m = p.matrix(&need(&a.matrix, "matrix")?)?;
            let (h, c) = check_mu_conservation(l, m, x, s, oracle)?;
            Ok(Outcome {
                claims: vec![ClaimReport::from_verdict("hypothesis", &h, s), ClaimReport::from_verdict("conservation", &c, s)],
                result: Value::Null,
            })
        }
        VariationalCheck::SolvablePair => {
            let x1 = p.field(&need(&a.field, "field")?)?;
            let x2 = p.field(&need(&a.field2, "field2")?)?;
            let lambda2 = opt_expr("lambda2", &a.lambda2)?;
            let k = a.order.unwrap_or(2);
            match check_solvable_pair(x1, &lambda, x2, &lambda2, k, s, oracle) {
                Ok(h) => Ok(Outcome {
                    claims: vec![ClaimReport::new("proportional commutator", true, 0.0)],
                    result: json!({ "factor": s.render(&h) }),
                }),
                Err(Error::NotProportional { coordinate, witness }) => Ok(Outcome {
                    claims: vec![ClaimReport::new("proportional commutator", false, f64::NAN).with_witness(&witness)],
                    result: json!({ "coordinate": coordinate }),
                }),
                Err(e) => Err(e.into()),
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DynsysArgs {
    #[serde(default)]
    system: Option<String>,
    #[serde(default)]
    algebra: Vec<String>,
    /// Diagonal of a linear part; the system, algebra and space come from it.
    #[serde(default)]
    normal_form: Vec<i64>,
    perturbation: Vec<String>,
    #[serde(default = "default_order")]
    order: usize,
}

fn default_order() -> usize {
    2
}

fn claim(name: &str, c: &Claim) -> ClaimReport {
    ClaimReport::new(name, c.holds, c.max_residual).with_witness(&c.witness)
}

fn op_dynsys(p: &Problem, a: &DynsysArgs, oracle: &Oracle) -> Result<Outcome, OpError> {
    let (ds, alg, extra) = if !a.normal_form.is_empty() {
        let d = a.normal_form.len();
        let rows: Vec<Vec<i64>> =
            (0..d).map(|i| (0..d).map(|j| if i == j { a.normal_form[i] } else { 0 }).collect()).collect();
        let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
        let nf = normal_form_instance(&Matrix::from_i64(&refs), jetsym::dynsys::DEFAULT_DEGREE_BOUND, oracle)?;
        let space = nf.system.space();
        let generators: Vec<String> = nf.generators.iter().map(|g| space.render(g)).collect();
        let fields: Vec<String> = nf.algebra.fields().iter().map(|f| f.render(space)).collect();
        (nf.system, nf.algebra, json!({ "generators": generators, "algebra": fields }))
    } else {
        let ds = p.system(a.system.as_deref().ok_or_else(|| p.error("args", "need `system` or `normal_form`"))?)?;
        let alg = SymmetryAlgebra::certify(&p.space, p.field_list(&a.algebra)?, oracle)?;
        (ds.clone(), alg, json!({}))
    };
    let space = ds.space().clone();
    let coeffs = a
        .perturbation
        .iter()
        .map(|t| space.parse(t).map_err(|e| p.error("perturbation", format!("in `{t}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let f = Perturbation::new(coeffs)?;
    let report = verify_sigma_perturbation(&ds, &alg, &f, a.order, oracle)?;
    let rhs: Vec<String> = report.perturbed.rhs().iter().map(|e| space.render(e)).collect();
    Ok(Outcome {
        claims: vec![
            claim("involution", &report.involution),
            claim("tangency", &report.tangency),
            claim("standard prolongations break unless σ vanishes", &report.control),
        ],
        result: json!({
            "sigma": render_matrix(&report.sigma, &space),
            "perturbed": rhs,
            "sigma_vanishes": report.sigma_vanishes,
            "instance": extra,
        }),
    })
}
