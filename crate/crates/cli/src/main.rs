//! `novikov`: command-line access to the free Novikov algebra toolkit.
//!
//! Every subcommand prints one JSON document on stdout. Domain errors print
//! `{"error": {...}}` and exit with status 2; usage errors exit with 1.

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde_json::{json, Value};

use novikov_core::eval::{
    closed_form, eval_s, find_nonvanishing_specialization, independence_rank_capped, lambda_image,
    reconstruct, AffineForm, SearchConfig, Specialization, DEFAULT_MAX_DEGREE,
};
use novikov_core::freiheit::{
    find_regular_point, freiheitssatz_witness, residual, solve_ode, Branch, DifferentialPolynomial,
    RegularPoint, WitnessConfig, WitnessReport,
};
use novikov_core::novikov::{expand_word, multilinearize, parse, NovikovElement, TableauBasis};
use novikov_core::poly::{format_rational, parse_rational, Polynomial, Rational, Var};
use novikov_core::tableau::{enumerate, multilinear_basis, NovikovTableau, TableauJson};
use novikov_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "novikov",
    version = concat!(env!("CARGO_PKG_VERSION"), " (output schema 1)"),
    about = "Free Novikov algebras: tableau bases, specializations and one-relator witnesses"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the tableau basis of a multidegree or of the multilinear part.
    Basis(Shape),
    /// Dimension of a multihomogeneous component.
    Dim(Shape),
    /// Expand an expression or a tableau word into differential monomials.
    Expand(ExprOrTableau),
    /// Coordinates of an expression in the tableau basis, per component.
    Nf(ExprArg),
    /// Decide whether an element vanishes identically in the free algebra.
    IdentityCheck(IdentityArgs),
    /// Closed forms f_T and g_T of a tableau.
    #[command(name = "lemma1")]
    ClosedForm(TableauArg),
    /// Recover a tableau from f_T and g_T.
    Reconstruct(ReconstructArgs),
    /// Rank of the f_T over the multilinear basis.
    Independence(NArg),
    /// Images in k[x] under x_i -> x^{s_i}, symbolic exponents, or a search.
    Eval(EvalArgs),
    /// Series solution of a differential polynomial about a regular point.
    SolveOde(SolveArgs),
    /// Homomorphism killing a relator f but not g.
    Witness(WitnessArgs),
}

#[derive(Args, Debug)]
struct Shape {
    /// Number of generators, for the multilinear component.
    #[arg(long)]
    n: Option<usize>,
    /// Use the multilinear component of degree n.
    #[arg(long)]
    multilinear: bool,
    /// Comma-separated occurrence counts.
    #[arg(long, value_delimiter = ',')]
    multidegree: Option<Vec<u32>>,
}

#[derive(Args, Debug)]
struct ExprOrTableau {
    #[arg(long)]
    expr: Option<String>,
    /// Tableau as JSON, e.g. {"rows":[[2,3],[1]]}.
    #[arg(long)]
    tableau: Option<String>,
}

#[derive(Args, Debug)]
struct ExprArg {
    #[arg(long)]
    expr: String,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Smallest exponent used by specializations.
    #[arg(long)]
    min_exponent: Option<u64>,
    /// Grid width bound of the specialization search.
    #[arg(long)]
    max_grid: Option<u64>,
    /// Seed of the randomized fallback search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        let mut c = SearchConfig {
            seed: self.seed,
            ..SearchConfig::default()
        };
        if let Some(b) = self.max_grid {
            c.max_grid = b;
        }
        c
    }
}

#[derive(Args, Debug)]
struct IdentityArgs {
    #[arg(long)]
    expr: String,
    /// Number of generators the expression may use.
    #[arg(long)]
    n: Option<u32>,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args, Debug)]
struct TableauArg {
    #[arg(long)]
    tableau: String,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    /// f_T as polynomial text in l1, l2, ...
    #[arg(long)]
    f: String,
    /// g_T as affine text in l1, l2, ...
    #[arg(long)]
    g: String,
}

#[derive(Args, Debug)]
struct NArg {
    #[arg(long)]
    n: usize,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    expr: String,
    /// Exponents s_1,s_2,... for x_i -> x^{s_i}.
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<u64>>,
    /// Search for exponents with a nonzero image.
    #[arg(long, conflicts_with = "s")]
    search: bool,
    #[command(flatten)]
    opts: SearchArgs,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Differential polynomial in x and t0, t1, ...
    #[arg(long)]
    h: String,
    /// Center followed by the value of each jet of h in increasing order,
    /// e.g. 0,1,1/2. Searched for when omitted.
    #[arg(long, value_delimiter = ',')]
    point: Option<Vec<String>>,
    /// Truncation order.
    #[arg(long, default_value_t = 16)]
    order: usize,
    /// Values of free low coefficients, e.g. 1=2/3.
    #[arg(long, value_delimiter = ',')]
    low: Vec<String>,
    /// Value bound of the regular-point search.
    #[arg(long, default_value_t = 8)]
    max_grid: u64,
}

#[derive(Args, Debug)]
struct WitnessArgs {
    /// Relator involving x_n.
    #[arg(long)]
    f: String,
    /// Nonzero element free of x_n.
    #[arg(long)]
    g: String,
    /// Index of the eliminated generator; defaults to the largest in f.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 16)]
    order: usize,
    #[arg(long, value_delimiter = ',')]
    low: Vec<String>,
    #[command(flatten)]
    search: SearchArgs,
}

/// A failure that is the caller's fault rather than the algebra's.
#[derive(Debug)]
struct Usage(String);

enum Failure {
    Usage(Usage),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u)
    }
}

type Outcome = Result<(Value, String), Failure>;

fn max_degree() -> Result<usize, Usage> {
    match std::env::var("NOVIKOV_MAX_DEGREE") {
        Ok(v) => v.parse().map_err(|_| {
            Usage(format!(
                "NOVIKOV_MAX_DEGREE must be a positive integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(DEFAULT_MAX_DEGREE),
    }
}

fn check_degree(d: usize) -> Result<(), Failure> {
    let cap = max_degree()?;
    if d > cap {
        return Err(Error::DegreeCap { degree: d, cap }.into());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Basis(a) => basis(a),
        Command::Dim(a) => dim(a),
        Command::Expand(a) => expand(a),
        Command::Nf(a) => nf(a),
        Command::IdentityCheck(a) => identity_check(a),
        Command::ClosedForm(a) => closed_form_cmd(a),
        Command::Reconstruct(a) => reconstruct_cmd(a),
        Command::Independence(a) => independence(a),
        Command::Eval(a) => eval(a),
        Command::SolveOde(a) => solve(a),
        Command::Witness(a) => witness(a),
    };
    match outcome {
        Ok((json, text)) => {
            match cli.format {
                Format::Json => println!("{json}"),
                Format::Text => println!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(Usage(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Domain(e)) => {
            let mut err = json!({ "kind": e.kind(), "message": e.to_string() });
            if let Some(stage) = e.stage() {
                err["stage"] = json!(stage);
            }
            match cli.format {
                Format::Json => println!("{}", json!({ "error": err })),
                Format::Text => println!("error ({}): {e}", e.kind()),
            }
            ExitCode::from(2)
        }
    }
}

enum Target {
    Multilinear(usize),
    Multidegree(Vec<u32>),
}

fn shape(a: &Shape) -> Result<Target, Failure> {
    match (&a.multidegree, a.n) {
        (Some(md), None) if !a.multilinear => {
            check_degree(md.iter().sum::<u32>() as usize)?;
            Ok(Target::Multidegree(md.clone()))
        }
        (None, Some(n)) => {
            check_degree(n)?;
            Ok(Target::Multilinear(n))
        }
        _ => Err(Usage("give either --multidegree or --n (with --multilinear)".into()).into()),
    }
}

fn tableau_json(t: &NovikovTableau) -> Value {
    serde_json::to_value(TableauJson::from(t)).expect("tableau serializes")
}

fn parse_tableau(text: &str) -> Result<NovikovTableau, Failure> {
    Ok(NovikovTableau::from_json(text)?)
}

fn basis(a: &Shape) -> Outcome {
    let (key, tableaux) = match shape(a)? {
        Target::Multilinear(n) => (json!({ "n": n }), multilinear_basis(n)?),
        Target::Multidegree(md) => {
            let t = enumerate(&md)?;
            (json!({ "multidegree": md }), t)
        }
    };
    let mut out = key;
    out["count"] = json!(tableaux.len());
    out["tableaux"] = Value::Array(tableaux.iter().map(tableau_json).collect());
    let text = tableaux
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join("\n");
    Ok((out, text))
}

fn dim(a: &Shape) -> Outcome {
    match shape(a)? {
        Target::Multilinear(n) => {
            let d = multilinear_basis(n)?.len();
            Ok((json!({ "n": n, "dimension": d }), d.to_string()))
        }
        Target::Multidegree(md) => {
            let d = enumerate(&md)?.len();
            Ok((json!({ "multidegree": md, "dimension": d }), d.to_string()))
        }
    }
}

fn parse_expr(text: &str) -> Result<NovikovElement, Failure> {
    Ok(parse(text)?)
}

fn element_json(e: &NovikovElement) -> Value {
    json!({
        "text": e.to_string(),
        "terms": serde_json::to_value(e.to_json()).expect("element serializes")["terms"],
    })
}

fn expand(a: &ExprOrTableau) -> Outcome {
    let e = match (&a.expr, &a.tableau) {
        (Some(x), None) => parse_expr(x)?,
        (None, Some(t)) => expand_word(&parse_tableau(t)?.word()?),
        _ => return Err(Usage("give exactly one of --expr and --tableau".into()).into()),
    };
    Ok((element_json(&e), e.to_string()))
}

fn nf(a: &ExprArg) -> Outcome {
    let e = parse_expr(&a.expr)?;
    let mut comps = Vec::new();
    let mut text = Vec::new();
    for (md, part) in e.components() {
        check_degree(md.iter().sum::<u32>() as usize)?;
        let basis = TableauBasis::new(&md)?;
        let coords = basis.coordinates(&part)?;
        let mut entries = Vec::new();
        for (t, c) in basis.tableaux().iter().zip(&coords) {
            if !c.is_zero() {
                entries
                    .push(json!({ "tableau": tableau_json(t), "coefficient": format_rational(c) }));
                text.push(format!("{} [{t}]", format_rational(c)));
            }
        }
        comps.push(json!({ "multidegree": md, "coordinates": entries }));
    }
    Ok((json!({ "components": comps }), text.join("\n")))
}

fn specialization_json(s: &Specialization) -> Value {
    json!({
        "s": s.exponents,
        "images": s.images.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "image": s.image.to_string(),
    })
}

fn identity_check(a: &IdentityArgs) -> Outcome {
    let e = parse_expr(&a.expr)?;
    if let Some(n) = a.n {
        if e.max_generator() > n {
            return Err(Usage(format!("expression uses generators beyond x{n}")).into());
        }
    }
    let cfg = a.search.config();
    let m = a.search.min_exponent.unwrap_or(0);
    for (md, part) in e.components() {
        if let Some(pol) = multilinearize(&part)?.into_iter().next() {
            let s = find_nonvanishing_specialization(&pol.element, m, &cfg)?;
            let renaming: BTreeMap<String, Vec<u32>> = pol
                .renaming
                .iter()
                .map(|(k, v)| (format!("x{k}"), v.clone()))
                .collect();
            let out = json!({
                "identity": false,
                "counterexample": {
                    "multidegree": md,
                    "multilinear": pol.element.to_string(),
                    "renaming": renaming,
                    "specialization": specialization_json(&s),
                },
            });
            let text = format!(
                "not an identity: component {md:?} maps to {} under s = {:?}",
                s.image, s.exponents
            );
            return Ok((out, text));
        }
    }
    Ok((json!({ "identity": true }), "identity".into()))
}

fn closed_form_cmd(a: &TableauArg) -> Outcome {
    let t = parse_tableau(&a.tableau)?;
    check_degree(t.degree())?;
    let pair = closed_form(&t)?;
    let (f, g) = (pair.f.to_string(), pair.g.to_string());
    let text = format!("f = {f}\ng = {g}");
    Ok((json!({ "f": f, "g": g }), text))
}

fn reconstruct_cmd(a: &ReconstructArgs) -> Outcome {
    let f: Polynomial = a.f.parse()?;
    let g: AffineForm = a.g.parse()?;
    let t = reconstruct(&f, &g)?;
    Ok((json!({ "tableau": tableau_json(&t) }), t.to_string()))
}

fn independence(a: &NArg) -> Outcome {
    let (rank, size) = independence_rank_capped(a.n, max_degree()?)?;
    let out = json!({ "n": a.n, "rank": rank, "size": size, "independent": rank == size });
    Ok((out, format!("rank {rank} of {size}")))
}

fn eval(a: &EvalArgs) -> Outcome {
    let e = parse_expr(&a.expr)?;
    if let Some(s) = &a.s {
        if s.len() < e.max_generator() as usize {
            return Err(Usage(format!("--s needs {} entries", e.max_generator())).into());
        }
        let img = eval_s(&e, s)?;
        return Ok((json!({ "s": s, "image": img.to_string() }), img.to_string()));
    }
    if a.search {
        let m = a.opts.min_exponent.unwrap_or(0);
        let s = find_nonvanishing_specialization(&e, m, &a.opts.config())?;
        let text = format!("s = {:?} -> {}", s.exponents, s.image);
        return Ok((specialization_json(&s), text));
    }
    let img = lambda_image(&e);
    let terms = serde_json::to_value(img.to_json()).expect("image serializes");
    let text = img
        .terms()
        .map(|(f, g)| format!("({f}) x^({g})"))
        .collect::<Vec<_>>()
        .join(" + ");
    Ok((
        json!({ "lambda": terms }),
        if text.is_empty() { "0".into() } else { text },
    ))
}

fn parse_low(items: &[String]) -> Result<BTreeMap<u32, Rational>, Failure> {
    let mut out = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Usage(format!("--low entries look like k=value, got {item:?}")))?;
        let k: u32 = k
            .trim()
            .parse()
            .map_err(|_| Usage(format!("bad coefficient index {k:?}")))?;
        out.insert(k, parse_rational(v.trim())?);
    }
    Ok(out)
}

fn point_json(p: &RegularPoint) -> Value {
    let jets: serde_json::Map<String, Value> = p
        .jets
        .iter()
        .map(|(a, c)| (format!("t{a}"), json!(format_rational(c))))
        .collect();
    json!({
        "center": format_rational(&p.center),
        "jets": jets,
        "jacobian": format_rational(&p.jacobian),
    })
}

fn solve(a: &SolveArgs) -> Outcome {
    let h: DifferentialPolynomial = a.h.parse()?;
    let low = parse_low(&a.low)?;
    let (h_used, point) = match &a.point {
        Some(vals) => {
            if vals.len() != h.jets().len() + 1 {
                return Err(Usage(format!(
                    "--point needs the center and {} jet values",
                    h.jets().len()
                ))
                .into());
            }
            let vals: Vec<Rational> = vals
                .iter()
                .map(|v| parse_rational(v.trim()))
                .collect::<Result<_, _>>()?;
            let jets = h
                .jets()
                .iter()
                .copied()
                .zip(vals[1..].iter().cloned())
                .collect();
            let mut p = RegularPoint {
                center: vals[0].clone(),
                jets,
                jacobian: Rational::zero(),
            };
            if let Some(top) = h.top_jet() {
                let mut at = BTreeMap::new();
                at.insert(Var::X, p.center.clone());
                for (&k, c) in &p.jets {
                    at.insert(Var::Jet(k), c.clone());
                }
                p.jacobian = h.partial(top).evaluate(&at)?;
            }
            (h, p)
        }
        None => {
            let r = find_regular_point(&h, a.max_grid)?;
            (r.reduced, r.point)
        }
    };
    let series = solve_ode(&h_used, &point, a.order, &low)?;
    let res = residual(&h_used, &series);
    let out = json!({
        "h": h_used.to_string(),
        "point": point_json(&point),
        "series": serde_json::to_value(series.to_json()).expect("series serializes"),
        "residual_zero_through": res.order(),
        "residual_zero": res.is_zero(),
    });
    let text = series
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| format!("a{k} = {}", format_rational(c)))
        .collect::<Vec<_>>()
        .join("\n");
    Ok((out, text))
}

fn witness(a: &WitnessArgs) -> Outcome {
    let f = parse_expr(&a.f)?;
    let g = parse_expr(&a.g)?;
    let mut cfg = WitnessConfig {
        order: a.order,
        search: a.search.config(),
        low: parse_low(&a.low)?,
        ..WitnessConfig::default()
    };
    if let Some(m) = a.search.min_exponent {
        cfg.min_exponent = m;
    }
    if let Some(b) = a.search.max_grid {
        cfg.point_grid = b;
    }
    let r = freiheitssatz_witness(&f, &g, a.n, &cfg)?;
    Ok((report_json(&r), r.log.join("\n")))
}

fn report_json(r: &WitnessReport) -> Value {
    let images: serde_json::Map<String, Value> = r
        .images
        .iter()
        .enumerate()
        .map(|(i, z)| (format!("x{}", i + 1), json!(z.to_string())))
        .collect();
    json!({
        "branch": match r.branch { Branch::Shortcut => "shortcut", Branch::Series => "series" },
        "n": r.n,
        "images": images,
        "series": serde_json::to_value(r.series.to_json()).expect("series serializes"),
        "h": r.h.as_ref().map(|h| h.to_string()),
        "solved": r.reduced.as_ref().map(|h| h.to_string()),
        "point": r.point.as_ref().map(point_json),
        "verified_order": r.verified_order,
        "theta_g": r.theta_g.to_string(),
        "log": r.log,
    })
}
