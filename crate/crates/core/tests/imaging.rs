use nalgebra::DMatrix;
use pinv_minres::imaging::{
    add_noise, channel_to_vec, decode_image, encode_image, phantom, psnr, read_image, ssim, vec_to_channel,
    write_image, ImagePlane,
};
use pinv_minres::Error;
use proptest::prelude::*;

fn constant(n: usize, v: f64) -> ImagePlane {
    ImagePlane::gray(DMatrix::from_element(n, n, v)).unwrap()
}

fn max_gap(a: &ImagePlane, b: &ImagePlane) -> f64 {
    a.channels().iter().zip(b.channels()).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
}

#[test]
fn psnr_examples() {
    let x = phantom(16, false);
    assert_eq!(psnr(&x, &x).unwrap(), f64::INFINITY);
    // Uniform offset 0.1: MSE = 0.01, PSNR = 20 dB.
    let a = constant(8, 0.2);
    let b = constant(8, 0.3);
    assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
    assert!(psnr(&a, &constant(9, 0.2)).is_err());
    assert!(psnr(&a, &phantom(8, true)).is_err());
}

#[test]
fn ssim_examples() {
    let x = phantom(32, true);
    assert!((ssim(&x, &x).unwrap() - 1.0).abs() < 1e-12);
    let noise = add_noise(&constant(32, 0.5), 0.3, 1);
    let other = add_noise(&constant(32, 0.5), 0.3, 2);
    assert!(ssim(&noise, &other).unwrap() < 0.2);
    assert!(ssim(&constant(8, 0.1), &constant(8, 0.1)).is_err());
}

#[test]
fn noise_is_deterministic_and_scaled() {
    let x = phantom(24, false);
    assert_eq!(add_noise(&x, 0.0, 5), x);
    assert_eq!(add_noise(&x, 0.05, 5), add_noise(&x, 0.05, 5));
    assert_ne!(add_noise(&x, 0.05, 5), add_noise(&x, 0.05, 6));
    let n = add_noise(&constant(64, 0.0), 0.1, 9);
    let sd = (n.channel(0).norm_squared() / 4096.0).sqrt();
    assert!((sd - 0.1).abs() < 0.01, "sample sd {sd}");
}

#[test]
fn phantom_spans_the_unit_interval() {
    for color in [false, true] {
        let p = phantom(40, color);
        assert_eq!(p.channel_count(), if color { 3 } else { 1 });
        for c in p.channels() {
            assert_eq!(c.min(), 0.0);
            assert_eq!(c.max(), 1.0);
        }
    }
}

#[test]
fn file_round_trip() {
    let dir = std::env::temp_dir().join(format!("pinv-minres-imaging-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for (name, color) in [("gray.pgm", false), ("rgb.ppm", true)] {
        let path = dir.join(name);
        let p = phantom(20, color);
        write_image(&p, &path).unwrap();
        let back = read_image(&path).unwrap();
        assert!(max_gap(&p, &back) <= 0.5 / 255.0 + 1e-12);
    }
    assert!(matches!(read_image(dir.join("missing.pgm")), Err(Error::Io(_))));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn header_layout_and_comments() {
    let bytes = encode_image(&constant(2, 1.0));
    assert_eq!(bytes, b"P5\n2 2\n255\n\xff\xff\xff\xff");
    let with_comment = b"P5 # made by hand\n2 # w\n2\n255\n\x00\x80\xff\x00";
    let img = decode_image(with_comment).unwrap();
    assert_eq!(img.channel(0)[(0, 1)], 128.0 / 255.0);
    assert_eq!(img.channel(0)[(1, 0)], 1.0);
}

#[test]
fn malformed_inputs_report_offsets() {
    match decode_image(b"P5\n4 4\n255\n\x00\x01") {
        Err(Error::Image { offset, message }) => {
            assert_eq!(offset, 13);
            assert!(message.contains("missing 14 bytes"), "{message}");
        }
        other => panic!("expected a truncation error, got {other:?}"),
    }
    for bad in [&b"P2\n1 1\n255\n0"[..], b"P5\n2 3\n255\n", b"P5\n2 2\n65535\n", b"P5\nx", b"", b"P5\n2 2\n255"] {
        assert!(matches!(decode_image(bad), Err(Error::Image { .. })), "{:?}", String::from_utf8_lossy(bad));
    }
}

#[test]
fn plane_constructor_checks_shape() {
    assert!(ImagePlane::new(vec![]).is_err());
    assert!(ImagePlane::new(vec![DMatrix::zeros(3, 3); 2]).is_err());
    assert!(ImagePlane::gray(DMatrix::zeros(3, 4)).is_err());
    assert!(vec_to_channel(3, &channel_to_vec(&DMatrix::zeros(2, 2))).is_err());
}

#[test]
fn renormalize_and_clamp() {
    let p = ImagePlane::gray(DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 1.0, 3.0])).unwrap();
    assert_eq!(p.clamped().channel(0), &DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]));
    assert_eq!(p.renormalized().channel(0), &DMatrix::from_row_slice(2, 2, &[0.0, 0.25, 0.5, 1.0]));
    assert_eq!(constant(2, 7.0).renormalized(), constant(2, 1.0));
}

fn plane() -> impl Strategy<Value = ImagePlane> {
    (1usize..12, prop::bool::ANY).prop_flat_map(|(n, color)| {
        let ch = if color { 3 } else { 1 };
        prop::collection::vec(prop::collection::vec(0.0f64..=1.0, n * n), ch)
            .prop_map(move |cs| ImagePlane::new(cs.into_iter().map(|v| DMatrix::from_vec(n, n, v)).collect()).unwrap())
    })
}

proptest! {
    #[test]
    fn encode_decode_round_trip(p in plane()) {
        let back = decode_image(&encode_image(&p)).unwrap();
        prop_assert_eq!(back.n(), p.n());
        prop_assert_eq!(back.channel_count(), p.channel_count());
        prop_assert!(max_gap(&p, &back) <= 0.5 / 255.0 + 1e-12);
        // Quantized planes survive exactly.
        prop_assert_eq!(decode_image(&encode_image(&back)).unwrap(), back);
    }

    #[test]
    fn psnr_is_symmetric_and_decreasing_in_noise(seed in any::<u64>(), s in 0.01f64..0.2) {
        let x = phantom(16, false);
        let y = add_noise(&x, s, seed);
        let z = add_noise(&x, 2.0 * s, seed);
        prop_assert_eq!(psnr(&x, &y).unwrap(), psnr(&y, &x).unwrap());
        prop_assert!(psnr(&x, &z).unwrap() < psnr(&x, &y).unwrap());
    }

    #[test]
    fn vec_round_trip(n in 1usize..10, seed in any::<u64>()) {
        let p = add_noise(&constant(n, 0.5), 1.0, seed);
        prop_assert_eq!(&vec_to_channel(n, &channel_to_vec(p.channel(0))).unwrap(), p.channel(0));
    }
}
