//! Error function.
//!
//! Rational approximations from FreeBSD msun `s_erf.c`, which carries this notice:
//!
//! Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
//! Developed at SunPro, a Sun Microsystems, Inc. business.
//! Permission to use, copy, modify, and distribute this software is freely
//! granted, provided that this notice is preserved.

const ERX: f64 = 8.450_629_115_104_675_292_97e-01;
const EFX: f64 = 1.283_791_670_955_125_863_16e-01;

const PP: [f64; 5] = [
    1.283_791_670_955_125_585_61e-01,
    -3.250_421_072_470_014_993_70e-01,
    -2.848_174_957_559_851_047_66e-02,
    -5.770_270_296_489_441_591_57e-03,
    -2.376_301_665_665_016_260_84e-05,
];
const QQ: [f64; 6] = [
    1.0,
    3.979_172_239_591_553_528_19e-01,
    6.502_224_998_876_729_444_85e-02,
    5.081_306_281_875_765_627_76e-03,
    1.324_947_380_043_216_445_26e-04,
    -3.960_228_278_775_368_123_20e-06,
];
const PA: [f64; 7] = [
    -2.362_118_560_752_659_440_77e-03,
    4.148_561_186_837_483_316_66e-01,
    -3.722_078_760_357_013_238_47e-01,
    3.183_466_199_011_617_536_74e-01,
    -1.108_946_942_823_966_774_76e-01,
    3.547_830_432_561_823_593_71e-02,
    -2.166_375_594_868_790_843_00e-03,
];
const QA: [f64; 7] = [
    1.0,
    1.064_208_804_008_442_282_86e-01,
    5.403_979_177_021_710_489_37e-01,
    7.182_865_441_419_626_628_68e-02,
    1.261_712_198_087_616_421_12e-01,
    1.363_708_391_202_905_073_62e-02,
    1.198_449_984_679_910_741_70e-02,
];
const RA: [f64; 8] = [
    -9.864_944_034_847_148_227_05e-03,
    -6.938_585_727_071_817_643_72e-01,
    -1.055_862_622_532_329_098_14e+01,
    -6.237_533_245_032_600_603_96e+01,
    -1.623_966_694_625_734_703_55e+02,
    -1.846_050_929_067_110_359_94e+02,
    -8.128_743_550_630_659_342_46e+01,
    -9.814_329_344_169_145_485_92e+00,
];
const SA: [f64; 9] = [
    1.0,
    1.965_127_166_743_925_712_92e+01,
    1.376_577_541_435_190_426_00e+02,
    4.345_658_774_752_292_288_21e+02,
    6.453_872_717_332_678_803_36e+02,
    4.290_081_400_275_678_333_86e+02,
    1.086_350_055_417_794_351_34e+02,
    6.570_249_770_319_281_701_35e+00,
    -6.042_441_521_485_809_874_38e-02,
];
const RB: [f64; 7] = [
    -9.864_942_924_700_099_285_97e-03,
    -7.992_832_376_805_230_065_74e-01,
    -1.775_795_491_775_475_198_89e+01,
    -1.606_363_848_558_219_160_62e+02,
    -6.375_664_433_683_896_277_22e+02,
    -1.025_095_131_611_077_249_54e+03,
    -4.835_191_916_086_513_970_19e+02,
];
const SB: [f64; 8] = [
    1.0,
    3.033_806_074_348_245_829_24e+01,
    3.257_925_129_965_739_188_26e+02,
    1.536_729_586_084_436_959_94e+03,
    3.199_858_219_508_595_539_08e+03,
    2.553_050_406_433_164_425_83e+03,
    4.745_285_412_069_553_672_15e+02,
    -2.244_095_244_658_581_833_62e+01,
];

fn poly(c: &[f64], z: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * z + k)
}

/// erfc(x)·x·exp(x²) style tail for x ≥ 1.25, returned as erfc(x).
fn erfc_tail(x: f64) -> f64 {
    let s = 1.0 / (x * x);
    let (r, q) = if x < 1.0 / 0.35 {
        (poly(&RA, s), poly(&SA, s))
    } else {
        (poly(&RB, s), poly(&SB, s))
    };
    // split x so that -x² is evaluated without rounding loss
    let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
    (-z * z - 0.5625).exp() * ((z - x) * (z + x) + r / q).exp() / x
}

pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let a = x.abs();
    let v = if a < 0.84375 {
        if a < 3.725_290_298_461_914e-9 {
            a + EFX * a
        } else {
            let z = a * a;
            a + a * poly(&PP, z) / poly(&QQ, z)
        }
    } else if a < 1.25 {
        let s = a - 1.0;
        ERX + poly(&PA, s) / poly(&QA, s)
    } else if a >= 6.0 {
        1.0
    } else {
        1.0 - erfc_tail(a)
    };
    v.copysign(x)
}

pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let a = x.abs();
    let upper = if a < 0.84375 {
        let z = a * a;
        let y = poly(&PP, z) / poly(&QQ, z);
        if a < 0.25 {
            1.0 - (a + a * y)
        } else {
            0.5 - (a * y + (a - 0.5))
        }
    } else if a < 1.25 {
        let s = a - 1.0;
        1.0 - ERX - poly(&PA, s) / poly(&QA, s)
    } else if a < 28.0 {
        erfc_tail(a)
    } else {
        0.0
    };
    if x < 0.0 {
        2.0 - upper
    } else {
        upper
    }
}

/// 1 − (√π/2)·erf(u)/u, accurate for small u where the direct form cancels.
pub fn erf_deficit(u: f64) -> f64 {
    let u = u.abs();
    if u < 0.5 {
        // sum_{n≥1} (-1)^{n+1} u^{2n} / (n! (2n+1))
        let z = u * u;
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 1..40 {
            term *= -z / n as f64;
            let t = -term / (2 * n + 1) as f64;
            sum += t;
            if t.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        1.0 - 0.5 * std::f64::consts::PI.sqrt() * erf(u) / u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// erf(x) = 2/√π · e^{-x²} · Σ 2ⁿ x^{2n+1} / (2n+1)!!, all terms positive.
    fn erf_series(x: f64) -> f64 {
        let z = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 0;
        while term > 1e-20 * sum || n < 10 {
            n += 1;
            term *= 2.0 * z / (2 * n + 1) as f64;
            sum += term;
        }
        2.0 / PI.sqrt() * (-z).exp() * sum
    }

    /// Lentz continued fraction for erfc, x > 0.
    fn erfc_cf(x: f64) -> f64 {
        // erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
        let mut f = x;
        let mut c = x;
        let mut d = 0.0;
        for k in 1..2000 {
            let a = k as f64 / 2.0;
            d = x + a * d;
            d = if d == 0.0 { 1e-300 } else { 1.0 / d };
            c = x + a / c;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / PI.sqrt() / f
    }

    #[test]
    fn matches_series_oracle_on_0_6() {
        let mut worst: f64 = 0.0;
        for i in 0..=6000 {
            let x = i as f64 * 1e-3;
            worst = worst.max((erf(x) - erf_series(x)).abs());
        }
        assert!(worst < 1e-12, "worst {worst}");
    }

    #[test]
    fn erfc_matches_continued_fraction() {
        for i in 0..200 {
            let x = 2.0 + i as f64 * 0.1;
            let r = (erfc(x) / erfc_cf(x) - 1.0).abs();
            assert!(r < 1e-12, "x={x} rel {r}");
        }
    }

    #[test]
    fn frozen_values() {
        // mpmath, 30 digits
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(0.5) - 0.520_499_877_813_046_537_682_746_653_892).abs() < 1e-15);
        assert!((erf(1.0) - 0.842_700_792_949_714_869_341_220_635_083).abs() < 1e-15);
        assert!((erf(2.0) - 0.995_322_265_018_952_734_162_069_256_367).abs() < 1e-15);
        assert!((erfc(3.0) / 2.209_049_699_858_544_137_277_612_958_232e-5 - 1.0).abs() < 1e-13);
        assert!((erfc(10.0) / 2.088_487_583_762_544_757_000_786_294_957e-45 - 1.0).abs() < 1e-13);
        assert_eq!(erf(-1.0), -erf(1.0));
        assert!((erfc(-1.0) - (2.0 - erfc(1.0))).abs() < 1e-16);
        assert!(erf(f64::NAN).is_nan());
    }

    #[test]
    fn deficit_branches_agree() {
        for &u in &[1e-8, 1e-4, 0.01, 0.1, 0.3, 0.4999999, 0.5, 0.7, 2.0, 50.0] {
            // erfc(6) ~ 2e-17, below double resolution of 1
            let e = if u > 6.0 { 1.0 } else { erf_series(u) };
            let direct = 1.0 - 0.5 * PI.sqrt() * e / u;
            let s = erf_deficit(u);
            if u > 0.05 {
                assert!((s / direct - 1.0).abs() < 1e-12, "u={u}");
            } else {
                let z = u * u;
                let taylor = z / 3.0 - z * z / 10.0 + z * z * z / 42.0 - z.powi(4) / 216.0;
                assert!((s / taylor - 1.0).abs() < 1e-12, "u={u}");
            }
        }
        assert_eq!(erf_deficit(0.0), 0.0);
    }
}
