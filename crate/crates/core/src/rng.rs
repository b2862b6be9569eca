//! Counter-based random numbers.
//!
//! Every draw is a pure function of (seed, stream identifiers): trajectories,
//! steps and components are keyed explicitly, so batches are reproducible
//! bit-for-bit no matter how work is split across threads. Mixing is
//! splitmix64; normals come from the inverse CDF, so one counter maps to one
//! normal deviate.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateless generator: draws are addressed, never consumed.
#[derive(Clone, Copy, Debug)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            key: splitmix64(seed ^ 0x6A09_E667_F3BC_C909),
        }
    }

    /// Derive a child generator (nested estimators get independent streams).
    pub fn child(&self, id: u64) -> CounterRng {
        CounterRng {
            key: splitmix64(self.key ^ splitmix64(id ^ 0x56CC_88D2_4A3B_91E5)),
        }
    }

    pub fn u64_at(&self, ids: &[u64]) -> u64 {
        let mut acc = self.key;
        for &id in ids {
            acc = splitmix64(acc ^ id);
        }
        splitmix64(acc)
    }

    /// Uniform in the open interval (0, 1); safe as an inverse-CDF argument.
    pub fn uniform_at(&self, ids: &[u64]) -> f64 {
        let bits = self.u64_at(ids) >> 11;
        (bits as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0) // 2^-53
    }

    /// Standard normal via the inverse CDF.
    pub fn normal_at(&self, ids: &[u64]) -> f64 {
        inverse_normal_cdf(self.uniform_at(ids))
    }
}

/// Sequential convenience wrapper for tests and sampling loops.
#[derive(Clone, Debug)]
pub struct SeqRng {
    rng: CounterRng,
    counter: u64,
}

impl SeqRng {
    pub fn new(seed: u64) -> Self {
        SeqRng {
            rng: CounterRng::new(seed),
            counter: 0,
        }
    }

    pub fn next_uniform(&mut self) -> f64 {
        self.counter += 1;
        self.rng.uniform_at(&[self.counter])
    }

    pub fn next_normal(&mut self) -> f64 {
        self.counter += 1;
        self.rng.normal_at(&[self.counter])
    }

    /// Uniform in [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_uniform()
    }

    pub fn next_index(&mut self, n: usize) -> usize {
        self.counter += 1;
        (self.rng.u64_at(&[self.counter]) % n as u64) as usize
    }
}

/// Wichura's AS241 (PPND16) rational approximation of the standard normal
/// quantile; relative error below 1e-15 over (0, 1).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        let num = ((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946_1e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((5.226_495_278_852_854_6e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return q * num / den;
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}
