use num_rational::BigRational;

use super::{ratio, Accounting, Randomness, SamplingError};

/// Algorithm Z switches from exact per-record steps to rejection-drawn
/// skips once `t` exceeds this multiple of the reservoir size.
pub const VITTER_THRESHOLD_FACTOR: u64 = 22;

/// Result of a single pass over a stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamSample<T> {
    /// Reservoir contents, by slot.
    pub items: Vec<T>,
    /// 1-based stream position of each reservoir item.
    pub positions: Vec<u64>,
    /// Records read from the stream.
    pub seen: u64,
    /// The stream ended before the reservoir filled.
    pub partial: bool,
    pub accounting: Accounting,
}

struct Reservoir<T> {
    items: Vec<T>,
    positions: Vec<u64>,
    seen: u64,
}

impl<T> Reservoir<T> {
    fn fill<I: Iterator<Item = T>>(stream: &mut I, k: usize) -> Self {
        let mut r = Reservoir {
            items: Vec::with_capacity(k),
            positions: Vec::with_capacity(k),
            seen: 0,
        };
        while r.items.len() < k {
            match stream.next() {
                Some(item) => {
                    r.seen += 1;
                    r.items.push(item);
                    r.positions.push(r.seen);
                }
                None => break,
            }
        }
        r
    }

    fn replace(&mut self, slot: u64, item: T) {
        let slot = (slot - 1) as usize;
        self.items[slot] = item;
        self.positions[slot] = self.seen;
    }

    fn finish<R: Randomness + ?Sized>(self, k: usize, rng: &R) -> StreamSample<T> {
        StreamSample {
            partial: self.items.len() < k,
            items: self.items,
            positions: self.positions,
            seen: self.seen,
            accounting: rng.accounting(),
        }
    }
}

fn check_reservoir(k: usize) -> Result<(), SamplingError> {
    if k == 0 {
        return Err(SamplingError::InvalidSpec("reservoir size must be at least 1".into()));
    }
    Ok(())
}

/// Algorithm R: record `t > k` draws `j` uniform on `{1..t}` and replaces
/// slot `j` when `j <= k`. One integer draw per record after the fill.
pub fn reservoir_r<T, I, R>(rng: &mut R, stream: I, k: usize) -> Result<StreamSample<T>, SamplingError>
where
    I: IntoIterator<Item = T>,
    R: Randomness + ?Sized,
{
    check_reservoir(k)?;
    let mut stream = stream.into_iter();
    let mut res = Reservoir::fill(&mut stream, k);
    for item in stream {
        res.seen += 1;
        let j = rng.uniform_int(res.seen)?;
        if j <= k as u64 {
            res.replace(j, item);
        }
    }
    Ok(res.finish(k, rng))
}

/// Vitter's Algorithm Z.
///
/// Up to `t = 22k` each record is accepted against a single uniform `V`
/// per selection, compared exactly against the running product
/// `prod (t-k)/t` (Algorithm X). Past the threshold, skip lengths come from
/// Vitter's rejection scheme with floating-point acceptance tests.
pub fn vitter_z<T, I, R>(rng: &mut R, stream: I, k: usize) -> Result<StreamSample<T>, SamplingError>
where
    I: IntoIterator<Item = T>,
    R: Randomness + ?Sized,
{
    check_reservoir(k)?;
    let mut stream = stream.into_iter();
    let mut res = Reservoir::fill(&mut stream, k);
    if res.items.len() < k {
        return Ok(res.finish(k, rng));
    }
    let n = k as u64;
    let threshold = VITTER_THRESHOLD_FACTOR * n;

    // Algorithm X.
    while res.seen < threshold {
        let mut quot: Option<BigRational> = None;
        let chosen = loop {
            let Some(item) = stream.next() else {
                return Ok(res.finish(k, rng));
            };
            res.seen += 1;
            if quot.is_none() {
                rng.new_real();
            }
            let t = res.seen;
            let factor = ratio(t - n, t);
            let q = match quot.take() {
                Some(q) => q * factor,
                None => factor,
            };
            if !rng.real_below(&q)? {
                break item;
            }
            quot = Some(q);
        };
        let slot = rng.uniform_int(n)?;
        res.replace(slot, chosen);
    }

    // Algorithm Z.
    let nf = n as f64;
    let mut t = res.seen as f64;
    let mut w = (-rng.open_unit()?.ln() / nf).exp();
    loop {
        let term = t - nf + 1.0;
        let skip = loop {
            let u = rng.open_unit()?;
            let x = t * (w - 1.0);
            let s = x.trunc();
            let lhs = (((u * ((t + 1.0) / term).powi(2)) * (term + s)) / (t + x)).ln() / nf;
            let lhs = lhs.exp();
            let rhs = (((t + x) / (term + s)) * term) / t;
            if lhs <= rhs {
                w = rhs / lhs;
                break s;
            }
            let mut y = (((u * (t + 1.0)) / term) * (t + s + 1.0)) / (t + x);
            let (mut denom, numer_lim) = if nf < s { (t, term + s) } else { (t - nf + s, t + 1.0) };
            let mut numer = t + s;
            while numer >= numer_lim {
                y = y * numer / denom;
                denom -= 1.0;
                numer -= 1.0;
            }
            w = (-rng.open_unit()?.ln() / nf).exp();
            if (y.ln() / nf).exp() <= (t + x) / t {
                break s;
            }
        };
        for _ in 0..skip as u64 {
            if stream.next().is_none() {
                return Ok(res.finish(k, rng));
            }
            res.seen += 1;
        }
        let Some(item) = stream.next() else {
            return Ok(res.finish(k, rng));
        };
        res.seen += 1;
        let slot = rng.uniform_int(n)?;
        res.replace(slot, item);
        t = res.seen as f64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{GeneratorSpec, Scripted};
    use crate::integers::mask_bits;
    use crate::sampling::Drawer;

    fn script_ints(width: u32, draws: &[(u64, u64)]) -> Scripted {
        let words = draws
            .iter()
            .map(|&(m, v)| (v - 1) << (width - mask_bits(m)))
            .collect();
        Scripted::new(width, words).unwrap()
    }

    #[test]
    fn stream_of_length_k_is_deterministic() {
        let mut s = Scripted::new(8, vec![]).unwrap();
        let out = reservoir_r(&mut Drawer::new(&mut s), ["a", "b", "c"], 3).unwrap();
        assert_eq!(out.items, vec!["a", "b", "c"]);
        assert!(!out.partial);
        let out = vitter_z(&mut Drawer::new(&mut s), ["a", "b", "c"], 3).unwrap();
        assert_eq!(out.items, vec!["a", "b", "c"]);
        assert_eq!(out.accounting, Accounting::default());
    }

    #[test]
    fn short_stream_is_flagged_partial() {
        let mut s = Scripted::new(8, vec![]).unwrap();
        let out = reservoir_r(&mut Drawer::new(&mut s), 1..=2u64, 5).unwrap();
        assert!(out.partial);
        assert_eq!(out.items, vec![1, 2]);
        let out = vitter_z(&mut Drawer::new(&mut s), 1..=2u64, 5).unwrap();
        assert!(out.partial);
    }

    #[test]
    fn traced_replacements() {
        // t = 3 draws j = 1, t = 4 draws j = 4
        let mut s = script_ints(4, &[(3, 1), (4, 4)]);
        let out = reservoir_r(&mut Drawer::new(&mut s), 1..=4u64, 2).unwrap();
        assert_eq!(out.items, vec![3, 2]);
        assert_eq!(out.positions, vec![3, 2]);
        assert_eq!(out.seen, 4);
    }

    #[test]
    fn zero_reservoir_is_rejected() {
        let mut s = Scripted::new(8, vec![]).unwrap();
        assert!(reservoir_r(&mut Drawer::new(&mut s), 1..=3u64, 0).is_err());
        assert!(vitter_z(&mut Drawer::new(&mut s), 1..=3u64, 0).is_err());
    }

    fn inclusion(run: impl Fn(&mut Drawer<'_, crate::generators::Generator>) -> Vec<u64>, label: &str) -> [f64; 5] {
        let mut g = GeneratorSpec::hash(label).build().unwrap();
        let mut d = Drawer::new(&mut g);
        let runs = 100_000;
        let mut counts = [0u64; 5];
        for _ in 0..runs {
            for i in run(&mut d) {
                counts[(i - 1) as usize] += 1;
            }
        }
        counts.map(|c| c as f64 / runs as f64)
    }

    #[test]
    fn algorithm_r_inclusion_probabilities() {
        let p = inclusion(|d| reservoir_r(d, 1..=5u64, 2).unwrap().items, "reservoir-r inclusion");
        for pi in p {
            assert!((pi - 0.4).abs() <= 0.01, "{p:?}");
        }
    }

    #[test]
    fn algorithm_z_inclusion_probabilities() {
        let p = inclusion(|d| vitter_z(d, 1..=5u64, 2).unwrap().items, "vitter-z inclusion");
        for pi in p {
            assert!((pi - 0.4).abs() <= 0.01, "{p:?}");
        }
    }

    #[test]
    fn algorithm_z_skip_phase_inclusion() {
        // k = 1, 200 records: the last 178 are handled by skips.
        let mut g = GeneratorSpec::hash("vitter-z skip phase").build().unwrap();
        let mut d = Drawer::new(&mut g);
        let runs = 40_000;
        let mut buckets = [0u64; 4];
        for _ in 0..runs {
            let out = vitter_z(&mut d, 1..=200u64, 1).unwrap();
            buckets[((out.items[0] - 1) / 50) as usize] += 1;
        }
        for b in buckets {
            let p = b as f64 / runs as f64;
            assert!((p - 0.25).abs() < 0.015, "{buckets:?}");
        }
    }

    #[test]
    fn algorithm_z_uses_far_fewer_words() {
        let n = 1_000_000u64;
        let mut g = GeneratorSpec::hash("call counts").build().unwrap();
        let r = reservoir_r(&mut Drawer::new(&mut g), 1..=n, 3).unwrap();
        let z = vitter_z(&mut Drawer::new(&mut g), 1..=n, 3).unwrap();
        assert!(r.accounting.words >= n - 3);
        assert!(z.accounting.words < 2_000, "{}", z.accounting.words);
        assert_eq!(z.seen, n);
        let mut pos = z.positions.clone();
        pos.sort_unstable();
        pos.dedup();
        assert_eq!(pos.len(), 3);
    }
}
