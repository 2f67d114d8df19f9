//! Polynomials over F_p as little-endian coefficient vectors.
//! Only what modulus search and inversion need.

use super::linalg::inv_mod;

pub fn trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub fn degree(a: &[u32]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let mut out: Vec<u32> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut out);
    out
}

pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let p64 = p as u64;
    let mut acc = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            acc[i + j] = (acc[i + j] + x as u64 * y as u64) % p64;
        }
    }
    let mut out: Vec<u32> = acc.into_iter().map(|v| v as u32).collect();
    trim(&mut out);
    out
}

/// Quotient and remainder; `b` must be nonzero.
pub fn divrem(a: &[u32], b: &[u32], p: u32) -> (Vec<u32>, Vec<u32>) {
    let db = degree(b).expect("division by zero polynomial");
    let mut r: Vec<u32> = a.to_vec();
    trim(&mut r);
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let inv_lead = inv_mod(b[db], p) as u64;
    let p64 = p as u64;
    let mut q = vec![0u32; r.len() - db];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let f = (r[dr] as u64 * inv_lead % p64) as u32;
        let shift = dr - db;
        q[shift] = f;
        for (i, &c) in b.iter().enumerate().take(db + 1) {
            let v = (r[i + shift] as u64 + (p64 - f as u64) * c as u64) % p64;
            r[i + shift] = v as u32;
        }
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

pub fn rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    divrem(a, b, p).1
}

pub fn monic(mut a: Vec<u32>, p: u32) -> Vec<u32> {
    trim(&mut a);
    if let Some(&lead) = a.last() {
        let inv = inv_mod(lead, p) as u64;
        for c in a.iter_mut() {
            *c = (*c as u64 * inv % p as u64) as u32;
        }
    }
    a
}

pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    monic(x, p)
}

/// Inverse of `a` modulo `m`, assuming gcd(a, m) = 1.
pub fn inv_modulo(a: &[u32], m: &[u32], p: u32) -> Option<Vec<u32>> {
    // Extended Euclid tracking only the coefficient of `a`.
    let mut r0 = m.to_vec();
    let mut r1 = rem(a, m, p);
    let mut s0: Vec<u32> = Vec::new();
    let mut s1: Vec<u32> = vec![1];
    trim(&mut r0);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s = sub(&s0, &mul(&q, &s1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    if degree(&r0) != Some(0) {
        return None;
    }
    let inv_lead = inv_mod(r0[0], p) as u64;
    let mut out: Vec<u32> = s0.iter().map(|&c| (c as u64 * inv_lead % p as u64) as u32).collect();
    trim(&mut out);
    Some(rem(&out, m, p))
}

/// `base^(p^k) mod m` by iterated p-th powers.
pub fn frobenius_iterate(base: &[u32], k: usize, m: &[u32], p: u32) -> Vec<u32> {
    let mut x = rem(base, m, p);
    for _ in 0..k {
        x = pow_mod_poly(&x, p as u64, m, p);
    }
    x
}

pub fn pow_mod_poly(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
    let mut acc = rem(&[1], m, p);
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = rem(&mul(&acc, &b, p), m, p);
        }
        e >>= 1;
        if e > 0 {
            b = rem(&mul(&b, &b, p), m, p);
        }
    }
    acc
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's irreducibility test for a monic polynomial of positive degree.
pub fn is_irreducible(f: &[u32], p: u32) -> bool {
    let Some(n) = degree(f) else { return false };
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let x = vec![0, 1];
    let full = frobenius_iterate(&x, n, f, p);
    if sub(&full, &x, p).iter().any(|&c| c != 0) {
        return false;
    }
    for r in prime_divisors(n) {
        let h = sub(&frobenius_iterate(&x, n / r, f, p), &x, p);
        if degree(&gcd(&h, f, p)) != Some(0) {
            return false;
        }
    }
    true
}

/// First monic irreducible polynomial of degree `n`, enumerating the lower
/// coefficients c_0 + c_1 p + ... in increasing order.
pub fn first_irreducible(n: usize, p: u32) -> Vec<u32> {
    assert!(n >= 1);
    let mut coeffs = vec![0u32; n];
    loop {
        let mut f = coeffs.clone();
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
        // increment little-endian counter
        let mut i = 0;
        loop {
            assert!(i < n, "no irreducible polynomial found");
            coeffs[i] += 1;
            if coeffs[i] == p {
                coeffs[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_moduli() {
        assert_eq!(first_irreducible(2, 2), vec![1, 1, 1]);
        assert_eq!(first_irreducible(2, 3), vec![1, 0, 1]);
        assert_eq!(first_irreducible(1, 5), vec![0, 1]);
        assert!(!is_irreducible(&[1, 0, 1], 2));
        assert!(!is_irreducible(&[1, 0, 1], 5));
        assert!(is_irreducible(&[2, 0, 1], 5));
    }

    #[test]
    fn inverse_mod_poly() {
        let m = vec![1, 1, 0, 1]; // x^3 + x + 1 over F_2
        let a = vec![0, 1, 1];
        let inv = inv_modulo(&a, &m, 2).unwrap();
        assert_eq!(rem(&mul(&a, &inv, 2), &m, 2), vec![1]);
    }
}
