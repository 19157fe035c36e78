//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigUint;
use partcong::gradedpoly::{GeneratorPowers, PolyRing};
use partcong::modfield::PrimeField;
use partcong::qseries::{euler_product, jacobi_cube_series, pentagonal_series, TruncatedSeries};

/// Exact p(n) for n ≤ max by counting partitions part by part.
pub fn partition_numbers(max: usize) -> Vec<BigUint> {
    let mut p = vec![BigUint::from(0u32); max + 1];
    p[0] = BigUint::from(1u32);
    for part in 1..=max {
        for n in part..=max {
            let prev = p[n - part].clone();
            p[n] += prev;
        }
    }
    p
}

/// Exact p₋ₐ(n) for n ≤ max: the a-fold convolution of p with itself.
pub fn colored_partitions(a: u32, max: usize) -> Vec<BigUint> {
    let p = partition_numbers(max);
    let mut acc = vec![BigUint::from(0u32); max + 1];
    acc[0] = BigUint::from(1u32);
    for _ in 0..a {
        let mut next = vec![BigUint::from(0u32); max + 1];
        for (i, x) in acc.iter().enumerate() {
            for (j, y) in p.iter().enumerate().take(max + 1 - i) {
                next[i + j] += x * y;
            }
        }
        acc = next;
    }
    acc
}

/// Exponent vector and t-exponent in 0..ℓ.
type Key = (Vec<u32>, u32);

/// (Σ J_i tⁱ)^b over GF(ℓ) with t^ℓ = 1, by b naive multiplications.
/// Variables are the residues in `vars`, in order.
pub fn brute_force_power(vars: &[u32], modulus: u32, b: u32) -> BTreeMap<Key, u32> {
    let n = vars.len();
    let mut acc: BTreeMap<Key, u32> = BTreeMap::new();
    acc.insert((vec![0; n], 0), 1);
    for _ in 0..b {
        let mut next: BTreeMap<Key, u32> = BTreeMap::new();
        for ((exps, t), c) in &acc {
            for (idx, &i) in vars.iter().enumerate() {
                let mut e = exps.clone();
                e[idx] += 1;
                let entry = next.entry((e, (t + i) % modulus)).or_insert(0);
                *entry = (*entry + c) % modulus;
            }
        }
        next.retain(|_, c| *c != 0);
        acc = next;
    }
    acc
}

/// Compares each t-grade of the brute force with `GeneratorPowers`.
/// Returns the first mismatching grade.
pub fn compare_powers(modulus: u32, b: u32) -> Result<(), String> {
    let ring = PolyRing::for_modulus(modulus).map_err(|e| e.to_string())?;
    let brute = brute_force_power(ring.vars(), modulus, b);
    let powers = GeneratorPowers::new(&ring);
    for grade in 0..modulus {
        let want: BTreeMap<Vec<u32>, u32> = brute
            .iter()
            .filter(|((_, t), _)| *t == grade)
            .map(|((e, _), c)| (e.clone(), *c))
            .collect();
        let got: BTreeMap<Vec<u32>, u32> = powers
            .power_component(b, grade)
            .terms()
            .iter()
            .map(|(m, c)| (m.exps().iter().map(|&x| x as u32).collect(), *c))
            .collect();
        if want != got {
            return Err(format!("ℓ={modulus} b={b} grade {grade}"));
        }
    }
    Ok(())
}

/// Every p₋ₐ(n) mod ℓ for n ≤ max, a ≤ max_a, against the big-integer count.
pub fn compare_colored_partitions(modulus: u32, max_a: u32, max: usize) -> Result<(), String> {
    let field = PrimeField::new(modulus).map_err(|e| e.to_string())?;
    let m = BigUint::from(modulus);
    for a in 1..=max_a {
        let exact = colored_partitions(a, max);
        let series = partcong::qseries::p_minus_a(a, max, field).map_err(|e| e.to_string())?;
        for (n, v) in exact.iter().enumerate() {
            let want = (v % &m).to_u32_digits().first().copied().unwrap_or(0);
            if series.coeff(n) != want {
                return Err(format!(
                    "ℓ={modulus} a={a} n={n}: {} vs {want}",
                    series.coeff(n)
                ));
            }
        }
    }
    Ok(())
}

/// The four series identities at order `order` mod ℓ; `sample` feeds the
/// inverse check.
pub fn series_identities(modulus: u32, order: usize, sample: &[i64]) -> Result<(), String> {
    let field = PrimeField::new(modulus).map_err(|e| e.to_string())?;
    let product = euler_product(order, field);
    if pentagonal_series(order, field) != product {
        return Err(format!("ℓ={modulus}: pentagonal ≠ product"));
    }
    if jacobi_cube_series(order, field) != product.power(3) {
        return Err(format!("ℓ={modulus}: Jacobi ≠ product³"));
    }
    if product.power(modulus as u64) != product.substitute_q_power(modulus as usize) {
        return Err(format!("ℓ={modulus}: E(q)^ℓ ≠ E(q^ℓ)"));
    }
    let mut coeffs = sample.to_vec();
    coeffs.resize(order + 1, 0);
    let s = TruncatedSeries::from_coeffs(field, &coeffs).map_err(|e| e.to_string())?;
    if s.coeff(0) != 0 {
        let inv = s.inverse().map_err(|e| e.to_string())?;
        if s.mul(&inv).map_err(|e| e.to_string())? != TruncatedSeries::one(order, field) {
            return Err(format!("ℓ={modulus}: s·s⁻¹ ≠ 1"));
        }
    }
    Ok(())
}
