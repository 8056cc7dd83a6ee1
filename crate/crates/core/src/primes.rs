//! Small-integer prime utilities.

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&p| is_prime(p)).collect()
}

/// Prime factorization as ascending `(prime, exponent)` pairs; empty for 0 and 1.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All `m <= bound` whose prime factors all lie in `primes`, ascending.
pub fn smooth_numbers(primes: &[u64], bound: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if bound == 0 {
        return out;
    }
    let mut stack = vec![(1u64, 0usize)];
    while let Some((m, start)) = stack.pop() {
        out.push(m);
        for (i, &p) in primes.iter().enumerate().skip(start) {
            if let Some(next) = m.checked_mul(p).filter(|&x| x <= bound) {
                stack.push((next, i));
            }
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(!is_prime(1));
        assert!(is_prime(1_000_000_007));
    }

    #[test]
    fn factorizations() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(97), vec![(97, 1)]);
        assert!(factorize(1).is_empty());
    }

    #[test]
    fn smooth() {
        assert_eq!(smooth_numbers(&[2, 3], 20), vec![1, 2, 3, 4, 6, 8, 9, 12, 16, 18]);
        assert_eq!(smooth_numbers(&[5], 30), vec![1, 5, 25]);
        assert_eq!(smooth_numbers(&[2], 1), vec![1]);
        assert!(smooth_numbers(&[2], 0).is_empty());
    }
}
