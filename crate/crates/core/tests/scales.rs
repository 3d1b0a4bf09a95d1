use audlet::scales::{aud_bandwidth, aud_forward, aud_inverse, aud_space, grid_bandwidths};
use audlet::FrequencyScale::{self, Bark, Erb, Mel};
use proptest::prelude::*;

const ALL: [FrequencyScale; 3] = [Erb, Bark, Mel];

#[test]
fn forward_spot_values() {
    // 9.265·ln(1 + 1000/228.8455) and 2595·log10(2), evaluated to 40 digits.
    assert!((aud_forward(Erb, 1000.0).unwrap() - 15.572457147860657).abs() < 1e-9);
    assert!((aud_forward(Mel, 700.0).unwrap() - 781.1728387480312).abs() < 1e-9);
    let bark = 13.0 * (0.76f64).atan() + 3.5 * (1.0f64 / 7.5).powi(2).atan();
    assert!((aud_forward(Bark, 1000.0).unwrap() - bark).abs() < 1e-12);
    assert!((bark - 8.51).abs() < 0.01);
    for s in ALL {
        assert_eq!(aud_forward(s, 0.0).unwrap(), 0.0);
    }
}

#[test]
fn inverse_spot_values() {
    assert_eq!(aud_inverse(Erb, 0.0).unwrap(), 0.0);
    let a = aud_forward(Erb, 1000.0).unwrap();
    assert!((aud_inverse(Erb, a).unwrap() - 1000.0).abs() < 0.1);
    // Bisection oracle on the Bark formula.
    let f = |x: f64| 13.0 * (0.00076 * x).atan() + 3.5 * (x / 7500.0).powi(2).atan();
    let (mut lo, mut hi) = (0.0, 24000.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 8.51 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let got = aud_inverse(Bark, 8.51).unwrap();
    assert!((got - lo).abs() < 1e-6);
    assert!((got - 1000.0).abs() < 0.5);
}

#[test]
fn bandwidth_spot_values() {
    assert_eq!(aud_bandwidth(Erb, 0.0).unwrap(), 24.7);
    assert!((aud_bandwidth(Erb, 1000.0).unwrap() - (24.7 + 1000.0 / 9.265)).abs() < 1e-12);
    assert!((aud_bandwidth(Erb, 1000.0).unwrap() - 132.63).abs() < 0.01);
    assert_eq!(aud_bandwidth(Bark, 0.0).unwrap(), 100.0);
}

#[test]
fn bad_inputs_are_domain_errors() {
    assert!(aud_forward(Erb, -1.0).is_err());
    assert!(aud_forward(Bark, f64::INFINITY).is_err());
    assert!(aud_inverse(Erb, -0.5).is_err());
    assert!(aud_inverse(Mel, 1e9).is_err());
    assert!(aud_space(Erb, 0.0, 8000.0, 0.0).is_err());
    assert!(aud_space(Erb, 0.0, 8000.0, -1.0).is_err());
}

#[test]
fn center_counts() {
    assert_eq!(aud_space(Erb, 0.0, 8000.0, 1.0).unwrap().len(), 35);
    let n6 = aud_space(Erb, 0.0, 8000.0, 6.0).unwrap().len();
    assert!((200..=202).contains(&n6), "{n6}");
    assert_eq!(aud_space(Erb, 100.0, 100.0 + 1e-12, 2.0).unwrap(), vec![100.0]);
}

#[test]
fn centers_span_the_range_with_equal_steps() {
    for s in ALL {
        for v in [0.5, 1.0, 3.0, 6.0] {
            let c = aud_space(s, 50.0, 7000.0, v).unwrap();
            assert_eq!(c[0], 50.0);
            assert!((c.last().unwrap() - 7000.0).abs() < 1e-6);
            let a: Vec<f64> = c.iter().map(|&f| aud_forward(s, f).unwrap()).collect();
            let step = a[1] - a[0];
            assert!(step <= 1.0 / v + 1e-9);
            for w in a.windows(2) {
                assert!(((w[1] - w[0]) - step).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn mel_bandwidth_from_grid_neighbours() {
    let c = aud_space(Mel, 0.0, 8000.0, 1.0 / 100.0).unwrap();
    let bw = grid_bandwidths(Mel, &c).unwrap();
    for k in 1..c.len() - 1 {
        assert!((bw[k] - (c[k + 1] - c[k - 1])).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn forward_is_strictly_increasing(a in 0.0f64..24000.0, gap in 1e-3f64..1000.0) {
        for s in ALL {
            prop_assert!(aud_forward(s, a).unwrap() < aud_forward(s, a + gap).unwrap());
        }
    }

    #[test]
    fn inverse_undoes_forward(f in 0.0f64..24000.0) {
        for s in ALL {
            let back = aud_inverse(s, aud_forward(s, f).unwrap()).unwrap();
            prop_assert!((back - f).abs() <= 1e-6 * f.max(1.0), "{:?}: {} -> {}", s, f, back);
        }
    }

    #[test]
    fn forward_undoes_inverse(frac in 0.0f64..1.0) {
        for s in ALL {
            let a = frac * aud_forward(s, 24000.0).unwrap();
            let back = aud_forward(s, aud_inverse(s, a).unwrap()).unwrap();
            prop_assert!((back - a).abs() <= 1e-9 * a.max(1.0));
        }
    }
}
