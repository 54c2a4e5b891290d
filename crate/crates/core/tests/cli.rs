use std::path::Path;
use std::process::{Command, Output};

use tvrestore::media::{self, MediaKind, MediaMapping};
use tvrestore::{psnr, tns, Tensor};

fn tvrestore(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvrestore"))
        .current_dir(cwd)
        .args(args)
        .output()
        .unwrap()
}

fn ok(cwd: &Path, args: &[&str]) -> String {
    let out = tvrestore(cwd, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(cwd: &Path, args: &[&str]) -> String {
    let out = tvrestore(cwd, args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(
        err.trim().lines().count(),
        1,
        "diagnostic not one line: {err}"
    );
    err
}

fn scene(m: usize, n: usize) -> Tensor {
    Tensor::from_fn(&[m, n, 3], |i| {
        let base = if (i[0] / 6 + i[1] / 6) % 2 == 0 {
            0.2
        } else {
            0.8
        };
        base + 0.05 * i[2] as f64
    })
}

#[test]
fn psnr_of_identical_inputs_is_inf() {
    let dir = tempfile::tempdir().unwrap();
    tns::save(&scene(8, 8), dir.path().join("x.tns")).unwrap();
    let out = ok(dir.path(), &["psnr", "--a", "x.tns", "--b", "x.tns"]);
    assert_eq!(out.trim(), "inf");
}

#[test]
fn psnr_reports_decibels() {
    let dir = tempfile::tempdir().unwrap();
    let r = Tensor::zeros(&[4, 4, 3]);
    tns::save(&r, dir.path().join("r.tns")).unwrap();
    tns::save(&Tensor::full(&[4, 4, 3], 0.1), dir.path().join("x.tns")).unwrap();
    let out = ok(dir.path(), &["psnr", "--a", "x.tns", "--b", "r.tns"]);
    let db: f64 = out.trim().parse().unwrap();
    assert!((db - 20.0).abs() < 1e-3);
}

#[test]
fn zero_lambda_denoise_returns_clamped_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = scene(10, 10);
    s.set(&[0, 0, 0], 1.4);
    s.set(&[1, 0, 2], -0.2);
    tns::save(&s, dir.path().join("s.tns")).unwrap();
    let out = ok(
        dir.path(),
        &[
            "denoise", "--input", "s.tns", "--output", "x.tns", "--lambda", "0",
        ],
    );
    assert!(out.contains("lambda=0"), "{out}");
    let x = tns::load(dir.path().join("x.tns")).unwrap();
    assert_eq!(x, s.map(|v| v.clamp(0.0, 1.0)));

    // already inside [0, 1]: output equals input
    tns::save(&scene(10, 10), dir.path().join("c.tns")).unwrap();
    let out = ok(
        dir.path(),
        &[
            "denoise", "--input", "c.tns", "--output", "y.tns", "--lambda", "0",
        ],
    );
    assert!(out.contains("psnr(output, input)=inf"), "{out}");
}

#[test]
fn denoise_png_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let s = scene(16, 16);
    media::save(
        &s,
        dir.path().join("in.png"),
        &MediaMapping::new(MediaKind::ColorImage),
    )
    .unwrap();
    ok(
        dir.path(),
        &[
            "denoise",
            "--input",
            "in.png",
            "--output",
            "out.png",
            "--lambda",
            "0.05",
            "--tv",
            "aniso",
            "--algo",
            "mfista",
            "--iters",
            "25",
            "--constraint",
            "none",
            "--trace",
            "t.csv",
        ],
    );
    let out = media::load(
        dir.path().join("out.png"),
        &MediaMapping::new(MediaKind::ColorImage),
    )
    .unwrap();
    assert_eq!(out.dims(), &[16, 16, 3]);

    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let mut lines = csv.lines();
    let provenance = lines.next().unwrap();
    assert!(provenance.starts_with("# tvrestore denoise"));
    assert!(provenance.contains("lambda=0.05") && provenance.contains("algo=Mfista"));
    assert_eq!(
        lines.next().unwrap(),
        "iter,dual_objective,primal_objective,rel_change"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 25);
    assert_eq!(rows[0][0], 1.0);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1] + 1e-9));
}

#[test]
fn blur_then_deblur_improves_psnr() {
    let dir = tempfile::tempdir().unwrap();
    let truth = scene(32, 32);
    tns::save(&truth, dir.path().join("truth.tns")).unwrap();
    ok(
        dir.path(),
        &[
            "blur",
            "--input",
            "truth.tns",
            "--output",
            "blurred.tns",
            "--psf-size",
            "7x7x3",
            "--sigma",
            "1",
            "--noise-std",
            "0.01",
            "--seed",
            "5",
        ],
    );
    let out = ok(
        dir.path(),
        &[
            "deblur",
            "--input",
            "blurred.tns",
            "--output",
            "restored.tns",
            "--psf-size",
            "7x7x3",
            "--sigma",
            "1",
            "--lambda",
            "0.005",
            "--outer-iters",
            "60",
            "--inner-iters",
            "10",
            "--algo",
            "mfista",
            "--trace",
            "deblur.csv",
        ],
    );
    assert!(out.contains("outer-iters=60"), "{out}");
    let blurred = tns::load(dir.path().join("blurred.tns")).unwrap();
    let restored = tns::load(dir.path().join("restored.tns")).unwrap();
    let before = psnr(&blurred, &truth, 1.0).unwrap();
    let after = psnr(&restored, &truth, 1.0).unwrap();
    assert!(after > before, "{before} -> {after}");

    let csv = std::fs::read_to_string(dir.path().join("deblur.csv")).unwrap();
    let first_row = csv.lines().nth(2).unwrap();
    assert!(first_row.starts_with("1,,"), "{first_row}");
}

#[test]
fn psf_may_have_lower_order_than_input() {
    let dir = tempfile::tempdir().unwrap();
    tns::save(&scene(12, 12), dir.path().join("x.tns")).unwrap();
    ok(
        dir.path(),
        &[
            "blur",
            "--input",
            "x.tns",
            "--output",
            "y.tns",
            "--psf-size",
            "5x5",
            "--sigma",
            "1",
        ],
    );
    let y = tns::load(dir.path().join("y.tns")).unwrap();
    assert_eq!(y.dims(), &[12, 12, 3]);
}

#[test]
fn convert_between_formats() {
    let dir = tempfile::tempdir().unwrap();
    // multiples of 1/255 survive 8-bit quantization exactly
    let video = Tensor::from_fn(&[4, 4, 3], |i| (i[2] * 100 + i[0]) as f64 / 255.0);
    tns::save(&video, dir.path().join("v.tns")).unwrap();
    ok(
        dir.path(),
        &[
            "convert",
            "--input",
            "v.tns",
            "--output",
            "frames",
            "--mapping",
            "gray-video",
        ],
    );
    assert!(dir.path().join("frames/frame_000003.png").exists());
    ok(
        dir.path(),
        &["convert", "--input", "frames", "--output", "back.tns"],
    );
    let back = tns::load(dir.path().join("back.tns")).unwrap();
    assert_eq!(back, video);

    // the same tensor read as a color image
    ok(
        dir.path(),
        &[
            "convert",
            "--input",
            "v.tns",
            "--output",
            "img.png",
            "--mapping",
            "color-image",
        ],
    );
    let img = media::load(
        dir.path().join("img.png"),
        &MediaMapping::new(MediaKind::ColorImage),
    )
    .unwrap();
    assert_eq!(img, video);
}

#[test]
fn invalid_flags_name_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    tns::save(&scene(8, 8), dir.path().join("x.tns")).unwrap();
    let base = ["denoise", "--input", "x.tns", "--output", "y.tns"];
    let with = |extra: &[&'static str]| [&base[..], extra].concat();

    assert!(fails(dir.path(), &with(&["--lambda", "-1"])).contains("--lambda"));
    assert!(fails(dir.path(), &with(&["--iters", "0"])).contains("--iters"));
    assert!(fails(dir.path(), &with(&["--tol", "nan"])).contains("--tol"));
    let err = tvrestore(dir.path(), &with(&["--tv", "l2"]));
    assert!(!err.status.success());
    assert!(String::from_utf8_lossy(&err.stderr).contains("--tv"));

    let blur = ["blur", "--input", "x.tns", "--output", "y.tns"];
    let with_blur = |extra: &[&'static str]| [&blur[..], extra].concat();
    assert!(fails(dir.path(), &with_blur(&["--psf-size", "7xq"])).contains("--psf-size"));
    assert!(fails(dir.path(), &with_blur(&["--psf-size", "9x9x3"])).contains("--psf-size"));
    assert!(fails(dir.path(), &with_blur(&["--sigma", "0"])).contains("--sigma"));
    assert!(fails(dir.path(), &with_blur(&["--noise-std", "-0.1"])).contains("--noise-std"));
    assert!(fails(
        dir.path(),
        &["psnr", "--a", "x.tns", "--b", "x.tns", "--peak", "0"]
    )
    .contains("--peak"));
}

#[test]
fn io_errors_are_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let err = fails(
        dir.path(),
        &["psnr", "--a", "missing.png", "--b", "missing.png"],
    );
    assert!(err.contains("missing.png"), "{err}");

    std::fs::write(dir.path().join("junk.tns"), b"nope").unwrap();
    fails(
        dir.path(),
        &["convert", "--input", "junk.tns", "--output", "o.tns"],
    );

    tns::save(&Tensor::zeros(&[4, 4, 3]), dir.path().join("a.tns")).unwrap();
    tns::save(&Tensor::zeros(&[4, 5, 3]), dir.path().join("b.tns")).unwrap();
    let err = fails(dir.path(), &["psnr", "--a", "a.tns", "--b", "b.tns"]);
    assert!(err.contains("shape"), "{err}");
}
