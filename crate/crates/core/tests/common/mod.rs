//! Test-side oracles, written independently of the library's algorithms.
#![allow(dead_code)]

use novikov_core::tableau::BracketedWord;

/// Dense polynomial in `x` with exact integer coefficients, index = exponent.
pub type Dense = Vec<i128>;

fn trim(mut p: Dense) -> Dense {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

pub fn dense_derivative(p: &Dense) -> Dense {
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c.checked_mul(k as i128).expect("overflow"))
            .collect(),
    )
}

pub fn dense_mul(a: &Dense, b: &Dense) -> Dense {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x.checked_mul(y).expect("overflow");
        }
    }
    trim(out)
}

pub fn dense_add(a: &Dense, b: &Dense, sign: i128) -> Dense {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| a.get(i).copied().unwrap_or(0) + sign * b.get(i).copied().unwrap_or(0))
            .collect(),
    )
}

pub fn x_power(k: u64) -> Dense {
    let mut p = vec![0i128; k as usize + 1];
    p[k as usize] = 1;
    p
}

/// Image of a word in `k[x]` with `f∘g = f'g` under `x_i ↦ images[i-1]`.
pub fn dense_word(w: &BracketedWord, images: &[Dense]) -> Dense {
    match w {
        BracketedWord::Leaf(a) => images[*a as usize - 1].clone(),
        BracketedWord::Product(l, r) => dense_mul(
            &dense_derivative(&dense_word(l, images)),
            &dense_word(r, images),
        ),
    }
}

pub fn dense_word_s(w: &BracketedWord, s: &[u64]) -> Dense {
    let images: Vec<Dense> = s.iter().map(|&k| x_power(k)).collect();
    dense_word(w, &images)
}

/// `(exponent, coefficient)` pairs of a dense polynomial, nonzero only.
pub fn dense_terms(p: &Dense) -> Vec<(u64, i128)> {
    p.iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(k, &c)| (k as u64, c))
        .collect()
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of weight −1 differential monomials of a multidegree, by brute
/// force over derivative orders of each occurrence.
pub fn brute_force_monomial_count(md: &[u32]) -> usize {
    let d: u32 = md.iter().sum();
    let mut owners = Vec::new();
    for (g, &c) in md.iter().enumerate() {
        owners.extend(std::iter::repeat_n(g, c as usize));
    }
    let mut seen = std::collections::BTreeSet::new();
    let slots = owners.len();
    let mut orders = vec![0u32; slots];
    loop {
        if orders.iter().sum::<u32>() == d - 1 {
            let mut key: Vec<(usize, u32)> =
                owners.iter().copied().zip(orders.iter().copied()).collect();
            key.sort();
            seen.insert(key);
        }
        let mut i = 0;
        loop {
            if i == slots {
                return seen.len();
            }
            if orders[i] < d - 1 {
                orders[i] += 1;
                break;
            }
            orders[i] = 0;
            i += 1;
        }
    }
}

/// Compositions of `d` into positive parts.
pub fn compositions(d: u32) -> Vec<Vec<u32>> {
    if d == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=d {
        for mut rest in compositions(d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All multidegrees with `len` entries (zeros allowed) and total in
/// `1..=max_total`, trailing zeros trimmed and duplicates removed.
pub fn multidegrees_with_gaps(len: usize, max_total: u32) -> Vec<Vec<u32>> {
    let mut out = std::collections::BTreeSet::new();
    let mut v = vec![0u32; len];
    loop {
        let t: u32 = v.iter().sum();
        if (1..=max_total).contains(&t) {
            let end = v.iter().rposition(|&x| x > 0).unwrap() + 1;
            out.insert(v[..end].to_vec());
        }
        let mut i = 0;
        loop {
            if i == len {
                return out.into_iter().collect();
            }
            if v[i] < max_total {
                v[i] += 1;
                break;
            }
            v[i] = 0;
            i += 1;
        }
    }
}
