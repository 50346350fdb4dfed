//! Small integer helpers shared across the crate.

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factors with multiplicity, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        while n.is_multiple_of(d) {
            out.push(d);
            n /= d;
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `(prime, exponent)` pairs, ascending by prime.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in prime_factors(n) {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Integer partitions of `n` into non-increasing parts.
pub fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn go(rem: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=rem.min(max)).rev() {
            cur.push(part);
            go(rem - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Ceiling of `3 * sqrt(n)` computed exactly on integers.
pub fn ceil_three_sqrt(n: u64) -> u64 {
    // smallest k with k^2 >= 9n
    let target = 9 * n;
    let mut k = (target as f64).sqrt() as u64;
    while k * k < target {
        k += 1;
    }
    while k > 0 && (k - 1) * (k - 1) >= target {
        k -= 1;
    }
    k
}

/// Floor of the square root, exact on integers.
pub fn isqrt(n: u64) -> u64 {
    let mut k = (n as f64).sqrt() as u64;
    while k * k > n {
        k -= 1;
    }
    while (k + 1) * (k + 1) <= n {
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_factors() {
        assert!(is_prime(2) && is_prime(11) && !is_prime(1) && !is_prime(45));
        assert_eq!(prime_factors(45), vec![3, 3, 5]);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(gcd(12, 18), 6);
    }

    #[test]
    fn binomials_and_partitions() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(partitions(4).len(), 5);
        assert_eq!(partitions(3), vec![vec![3], vec![2, 1], vec![1, 1, 1]]);
    }

    #[test]
    fn integer_roots() {
        assert_eq!(ceil_three_sqrt(16), 12);
        assert_eq!(ceil_three_sqrt(18), 13);
        assert_eq!(ceil_three_sqrt(4), 6);
        assert_eq!(isqrt(37), 6);
        assert_eq!(isqrt(36), 6);
    }
}
