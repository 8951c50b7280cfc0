//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Run with `cargo test -p novikov-core --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{binomial, compositions, dense_terms, dense_word_s, multidegrees_with_gaps};
use novikov_core::eval::{
    closed_form, eval_lambda, eval_s_word, find_nonvanishing_specialization, independence_rank,
    leading_f, reconstruct, AElement, ALambdaElement, SearchConfig,
};
use novikov_core::freiheit::{
    freiheitssatz_witness, residual, solve_ode, Branch, RegularPoint, WitnessConfig,
};
use novikov_core::novikov::{expand_word, NovikovElement, TableauBasis};
use novikov_core::poly::{leading_term, rat, ratio, Rational};
use novikov_core::tableau::{enumerate, multilinear_basis, BracketedWord, NovikovTableau};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;
const LIMIT_BASIS_COUNTS: Duration = Duration::from_secs(10);
const LIMIT_BASIS_PROPERTY: Duration = Duration::from_secs(60);
const LIMIT_CLOSED_FORM_STRUCTURE: Duration = Duration::from_secs(120);
const LIMIT_WITNESS: Duration = Duration::from_secs(10);
const IDENTITY_TRIPLES: usize = 200;
const SPECIALIZATION_SAMPLES: usize = 100;
const EXP_ORDER: usize = 16;
const SQRT_ORDER: usize = 8;
const WITNESS_ORDER: usize = 12;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn basis_counts() -> Check {
    let start = Instant::now();
    for n in 1..=5u64 {
        let got = multilinear_basis(n as usize)
            .map_err(|e| e.to_string())?
            .len();
        let want = binomial(2 * n - 2, n - 1) as usize;
        ensure(got == want, || {
            format!("n = {n}: {got} tableaux, expected {want}")
        })?;
    }
    within(start, LIMIT_BASIS_COUNTS)?;
    Ok("1, 2, 6, 20, 70".into())
}

fn basis_property() -> Check {
    let start = Instant::now();
    let mut checked = 0;
    for d in 1..=5 {
        for md in compositions(d) {
            let b = TableauBasis::new(&md).map_err(|e| e.to_string())?;
            ensure(b.tableaux().len() == b.monomials().len(), || {
                format!("{md:?}: matrix is not square")
            })?;
            ensure(b.is_square_invertible(), || format!("{md:?}: singular"))?;
            checked += 1;
        }
    }
    for md in multidegrees_with_gaps(5, 5) {
        let b = TableauBasis::new(&md).map_err(|e| e.to_string())?;
        ensure(b.is_square_invertible(), || format!("{md:?}: singular"))?;
        checked += 1;
    }
    within(start, LIMIT_BASIS_PROPERTY)?;
    Ok(format!("{checked} multidegrees"))
}

fn random_element(rng: &mut ChaCha8Rng) -> NovikovElement {
    fn word(rng: &mut ChaCha8Rng, degree: usize) -> BracketedWord {
        if degree == 1 {
            return BracketedWord::Leaf(rng.gen_range(1..=3));
        }
        let left = rng.gen_range(1..degree);
        BracketedWord::product(word(rng, left), word(rng, degree - left))
    }
    let mut e = NovikovElement::zero();
    for _ in 0..rng.gen_range(1..=3) {
        let d = rng.gen_range(1..=3);
        let c = rat(rng.gen_range(-4..=4));
        e = &e + &expand_word(&word(rng, d)).scale(&c);
    }
    e
}

fn identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..IDENTITY_TRIPLES {
        let (a, b, c) = (
            random_element(&mut rng),
            random_element(&mut rng),
            random_element(&mut rng),
        );
        let rs_l = &a.product(&b).product(&c) - &a.product(&b.product(&c));
        let rs_r = &a.product(&c).product(&b) - &a.product(&c.product(&b));
        ensure(rs_l == rs_r, || format!("triple {i}: right symmetry fails"))?;
        ensure(
            a.product(&b.product(&c)) == b.product(&a.product(&c)),
            || format!("triple {i}: left commutativity fails"),
        )?;
    }
    Ok(format!("{IDENTITY_TRIPLES} triples, zero failures"))
}

fn all_tableaux_to_degree_5() -> Result<Vec<NovikovTableau>, String> {
    let mut out = Vec::new();
    for md in multidegrees_with_gaps(5, 5) {
        out.extend(enumerate(&md).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn closed_forms() -> Check {
    let all = all_tableaux_to_degree_5()?;
    for t in &all {
        let pair = closed_form(t).map_err(|e| format!("{t}: {e}"))?;
        let image = eval_lambda(&t.word().map_err(|e| e.to_string())?);
        ensure(image == ALambdaElement::term(pair.f, pair.g), || {
            format!("{t}: closed form differs from the symbolic image")
        })?;
    }
    Ok(format!("{} tableaux", all.len()))
}

fn reconstruction() -> Check {
    let all = all_tableaux_to_degree_5()?;
    let repeated = all.iter().filter(|t| t.has_repeated_labels()).count();
    for t in &all {
        let pair = closed_form(t).map_err(|e| e.to_string())?;
        let back = reconstruct(&pair.f, &pair.g).map_err(|e| format!("{t}: {e}"))?;
        ensure(&back == t, || format!("{t} came back as {back}"))?;
    }
    Ok(format!(
        "{} tableaux ({repeated} with repeated labels)",
        all.len()
    ))
}

fn closed_form_structure() -> Check {
    let start = Instant::now();
    for n in 1..=5 {
        let basis = multilinear_basis(n).map_err(|e| e.to_string())?;
        let mut seen = BTreeSet::new();
        for t in &basis {
            let f = closed_form(t).map_err(|e| e.to_string())?.f;
            let (m, c) = leading_term(&f).map_err(|e| e.to_string())?;
            let want = leading_f(t).map_err(|e| e.to_string())?;
            ensure(m == want && c == Rational::one(), || {
                format!("{t}: leading term {c}*{m}, expected {want}")
            })?;
            let mut gamma: Vec<usize> = t
                .rows()
                .iter()
                .enumerate()
                .map(|(i, r)| if i == 0 { r.len() - 1 } else { r.len() })
                .collect();
            gamma.sort_unstable_by(|a, b| b.cmp(a));
            let mut exps: Vec<usize> = m.exponents().iter().map(|&(_, e)| e as usize).collect();
            exps.sort_unstable_by(|a, b| b.cmp(a));
            gamma.retain(|&r| r > 0);
            ensure(exps == gamma, || {
                format!("{t}: γ = {exps:?}, rows {gamma:?}")
            })?;
            ensure(seen.insert(f.to_string()), || {
                format!("n = {n}: f_T repeats at {t}")
            })?;
        }
        let (rank, size) = independence_rank(n).map_err(|e| e.to_string())?;
        ensure(rank == size && size == basis.len(), || {
            format!("n = {n}: rank {rank} of {size}")
        })?;
    }
    within(start, LIMIT_CLOSED_FORM_STRUCTURE)?;
    Ok("n = 1..5".into())
}

fn specializations() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let config = SearchConfig::default();
    let mut n_hist = [0usize; 5];
    for i in 0..SPECIALIZATION_SAMPLES {
        let n = rng.gen_range(1..=4usize);
        let basis = multilinear_basis(n).map_err(|e| e.to_string())?;
        let mut e = NovikovElement::zero();
        while e.is_zero() {
            for t in &basis {
                if rng.gen_bool(0.5) {
                    let c = ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3));
                    e = &e + &expand_word(&t.word().unwrap()).scale(&c);
                }
            }
        }
        n_hist[n] += 1;
        let s = find_nonvanishing_specialization(&e, 2, &config)
            .map_err(|err| format!("sample {i}: {err}"))?;
        let exps = s
            .exponents
            .clone()
            .ok_or(format!("sample {i}: no monomial hit"))?;
        ensure(exps.iter().all(|&v| v >= 2), || {
            format!("sample {i}: s = {exps:?}")
        })?;
        ensure(
            !s.image.is_zero() && s.image.divisible_by_x_power(2),
            || {
                format!(
                    "sample {i}: image {} not a nonzero multiple of x^2",
                    s.image
                )
            },
        )?;
        // Recompute the image from the tableau coordinates with the dense oracle.
        let b = TableauBasis::new(&vec![1; n]).map_err(|e| e.to_string())?;
        let coords = b.coordinates(&e).map_err(|e| e.to_string())?;
        let mut oracle = AElement::zero();
        for (t, c) in b.tableaux().iter().zip(&coords) {
            let w = dense_word_s(&t.word().unwrap(), &exps);
            let a =
                AElement::from_terms(dense_terms(&w).into_iter().map(|(k, v)| (k, rat(v as i64))));
            oracle = oracle.add(&a.scale(c));
        }
        ensure(oracle == s.image, || {
            format!("sample {i}: oracle disagrees")
        })?;
    }
    Ok(format!(
        "{SPECIALIZATION_SAMPLES} elements (n=1..4: {:?}), all images in (x^2)",
        &n_hist[1..]
    ))
}

fn factorial(k: u64) -> Rational {
    (1..=k).fold(Rational::one(), |acc, j| acc * rat(j as i64))
}

fn series_solver() -> Check {
    let h = "t1-t0"
        .parse()
        .map_err(|e: novikov_core::Error| e.to_string())?;
    let p = RegularPoint {
        center: rat(0),
        jets: [(0, rat(1)), (1, rat(1))].into_iter().collect(),
        jacobian: rat(1),
    };
    let t = solve_ode(&h, &p, EXP_ORDER, &Default::default()).map_err(|e| e.to_string())?;
    for k in 0..=EXP_ORDER {
        ensure(
            t.coeff(k) == &(Rational::one() / factorial(k as u64)),
            || format!("exp: a_{k} = {}", t.coeff(k)),
        )?;
    }
    let r = residual(&h, &t);
    ensure(r.order() == EXP_ORDER - 1 && r.is_zero(), || {
        format!("exp: residual nonzero or order {}", r.order())
    })?;

    let h = "2*t1*t0-1"
        .parse()
        .map_err(|e: novikov_core::Error| e.to_string())?;
    let p = RegularPoint {
        center: rat(0),
        jets: [(0, rat(1)), (1, ratio(1, 2))].into_iter().collect(),
        jacobian: rat(2),
    };
    let t = solve_ode(&h, &p, SQRT_ORDER, &Default::default()).map_err(|e| e.to_string())?;
    // Binomial coefficients C(1/2, k).
    let mut c = Rational::one();
    for k in 0..=SQRT_ORDER {
        ensure(t.coeff(k) == &c, || {
            format!("sqrt: a_{k} = {}, expected {c}", t.coeff(k))
        })?;
        c = c * (ratio(1, 2) - rat(k as i64)) / rat(k as i64 + 1);
    }
    let sq = t.mul(&t);
    for k in 0..=SQRT_ORDER {
        let want = if k <= 1 { rat(1) } else { rat(0) };
        ensure(sq.coeff(k) == &want, || {
            format!("sqrt: square has {} at x^{k}", sq.coeff(k))
        })?;
    }
    Ok(format!(
        "exp through {EXP_ORDER}, sqrt(1+x) through {SQRT_ORDER}"
    ))
}

fn witness() -> Check {
    let start = Instant::now();
    let cfg = WitnessConfig {
        order: WITNESS_ORDER,
        ..WitnessConfig::default()
    };
    let f = novikov_core::novikov::parse("(x2*x2) - x1").unwrap();
    let g = novikov_core::novikov::parse("x1").unwrap();
    let r = freiheitssatz_witness(&f, &g, None, &cfg).map_err(|e| e.to_string())?;
    ensure(r.branch == Branch::Series, || {
        "expected the series branch".into()
    })?;
    ensure(!r.theta_g.is_zero(), || "θ(g) = 0".into())?;
    let solved = r.reduced.as_ref().or(r.h.as_ref()).ok_or("no h reported")?;
    let res = residual(solved, &r.series);
    ensure(res.order() == WITNESS_ORDER - 1 && res.is_zero(), || {
        format!("residual nonzero or order {}", res.order())
    })?;
    // Z^2 = (2x^3 + 1)/3 about x = 1: 1 + 2u + 2u^2 + 2/3 u^3 with u = x - 1.
    let sq = r.series.mul(&r.series);
    let want = [rat(1), rat(2), rat(2), ratio(2, 3)];
    for k in 0..=WITNESS_ORDER {
        let w = want.get(k).cloned().unwrap_or_else(Rational::zero);
        ensure(sq.coeff(k) == &w, || {
            format!("Z^2 has {} at order {k}", sq.coeff(k))
        })?;
    }

    let f = novikov_core::novikov::parse("(x2*x1)").unwrap();
    let r = freiheitssatz_witness(&f, &g, None, &cfg).map_err(|e| e.to_string())?;
    ensure(r.branch == Branch::Shortcut && r.series.is_zero(), || {
        "expected the shortcut branch with x2 ↦ 0".into()
    })?;
    ensure(r.theta_f.is_zero() && !r.theta_g.is_zero(), || {
        "shortcut witness fails".into()
    })?;
    within(start, LIMIT_WITNESS)?;
    Ok(format!(
        "series branch through order {}, shortcut branch",
        WITNESS_ORDER - 1
    ))
}

fn commuting_diagram() -> Check {
    const GRID: [u64; 3] = [0, 1, 2];
    let mut count = 0;
    for d in 1..=4 {
        for md in compositions(d) {
            let n = md.len();
            for t in enumerate(&md).map_err(|e| e.to_string())? {
                let w = t.word().unwrap();
                let lam = eval_lambda(&w);
                let mut idx = vec![0usize; n];
                loop {
                    let s: Vec<u64> = idx.iter().map(|&i| GRID[i]).collect();
                    let a = lam.specialize(&s).map_err(|e| e.to_string())?;
                    let b = eval_s_word(&w, &s).map_err(|e| e.to_string())?;
                    ensure(a == b, || format!("{t} at {s:?}: {a} vs {b}"))?;
                    count += 1;
                    let Some(p) = idx.iter().rposition(|&i| i + 1 < GRID.len()) else {
                        break;
                    };
                    idx[p] += 1;
                    idx[p + 1..].iter_mut().for_each(|i| *i = 0);
                }
            }
        }
    }
    Ok(format!("{count} (word, point) pairs"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("basis counts C(2n-2, n-1) for n = 1..5", basis_counts),
        (
            "tableau expansion matrices invertible, degree <= 5",
            basis_property,
        ),
        (
            "right-symmetric and left-commutative identities",
            identities,
        ),
        (
            "closed forms f_T, g_T equal the symbolic images",
            closed_forms,
        ),
        ("tableaux recovered from (f_T, g_T)", reconstruction),
        (
            "f_T distinct, leading terms, full rank",
            closed_form_structure,
        ),
        (
            "nonvanishing specializations with exponents >= 2",
            specializations,
        ),
        ("power-series solver on exp and sqrt(1+x)", series_solver),
        ("one-relator witnesses, both branches", witness),
        (
            "symbolic and integer specializations commute",
            commuting_diagram,
        ),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{t:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{t:.2?}]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
