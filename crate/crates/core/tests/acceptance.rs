// Acceptance checks, one PASS/FAIL line per criterion.
//
// The process exits nonzero when a criterion fails, except for failures listed
// in KNOWN_GAPS, which are still printed as FAIL. Set LIZIP_ACCEPTANCE_STRICT=1
// to make known gaps fatal too. Latency is reported but never gates the exit code.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use lizip::harness::run_ablation_cloud;
use lizip::predictor::{load_lizm, DEFAULT_CONTEXT_SIZE};
use lizip::residual::ShuffledStream;
use lizip::{
    byte_shuffle, byte_unshuffle, compress_cloud, decompress_cloud, decompress_quantized, entropy,
    max_reconstruction_error, morton_encode, morton_sort, quantize, read_frame, spread_bits, synth_cloud, Backend,
    BenchConfig, CodecConfig, FrameFormat, FrameSpec, LizipHeader, Mlp, PointCloud, PredictorModel, SynthKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_GAPS: &[usize] = &[6];
const INFORMATIONAL: &[usize] = &[7];

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn backends() -> Vec<Backend> {
    Backend::ALL.into_iter().filter(|b| b.is_available()).collect()
}

fn lossless_integer_domain() -> Outcome {
    let k = DEFAULT_CONTEXT_SIZE;
    let sizes = [0, 1, k, k + 1, 1_000, 100_000];
    let blocks = [k, 1_000, 16_384];
    let models = [PredictorModel::linear(), PredictorModel::Mlp(Mlp::seeded(k, 32, 2, 17).unwrap())];
    let backends = backends();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    for case in 0..200 {
        let n = sizes[case % sizes.len()];
        let kind = SynthKind::ALL[(case / 6) % SynthKind::ALL.len()];
        let backend = backends[(case / 24) % backends.len()];
        let model = &models[(case / 48) % models.len()];
        let block = blocks[(case + case / 6) % blocks.len()];
        let sigma = [0.0, 0.005, 0.02, 0.1][rng.gen_range(0..4)];
        let scale = [1e3f32, 1e4, 1e5][rng.gen_range(0..3)];
        let mut cloud = synth_cloud(kind, n, sigma, rng.gen());
        if rng.gen() {
            cloud = lizip::ingest::with_synthetic_intensity(cloud, rng.gen());
        }
        let config = CodecConfig::default().with_backend(backend).with_scale(scale).with_block_size(block);
        let packed = match compress_cloud(&cloud, &config, model) {
            Ok(p) => p,
            Err(e) => return outcome(false, format!("case {case}: compress failed: {e}")),
        };
        let (expected, _) = morton_sort(&quantize(&cloud, scale).unwrap()).unwrap();
        match decompress_quantized(&packed, model) {
            Ok(decoded) if decoded == expected => {}
            Ok(_) => {
                return outcome(
                    false,
                    format!(
                        "case {case}: {n} {} points, {backend}, {}, block {block} decoded differently",
                        kind.name(),
                        model.kind()
                    ),
                )
            }
            Err(e) => return outcome(false, format!("case {case}: decompress failed: {e}")),
        }
    }
    let elapsed = start.elapsed();
    outcome(
        elapsed < Duration::from_secs(120),
        format!("200 clouds bit-exact in {:.1} s (limit 120 s)", elapsed.as_secs_f64()),
    )
}

fn metric_error_bound() -> Outcome {
    let model = PredictorModel::linear();
    let mut worst = 0.0f64;
    for (seed, kind) in SynthKind::ALL.into_iter().enumerate() {
        let cloud = synth_cloud(kind, 100_000, 0.02, seed as u64);
        for backend in backends() {
            let config = CodecConfig::default().with_backend(backend).with_scale(1e5);
            let packed = compress_cloud(&cloud, &config, &model).unwrap();
            let restored = decompress_cloud(&packed, &model).unwrap();
            let (_, order) = morton_sort(&quantize(&cloud, 1e5).unwrap()).unwrap();
            worst = worst.max(max_reconstruction_error(&cloud.permuted(&order), &restored).unwrap());
        }
    }
    outcome(worst <= 0.010, format!("max per-axis error {worst:.5} mm at scale 1e5 (bound 0.010 mm)"))
}

fn naive_spread(v: u32) -> u64 {
    (0..21).fold(0u64, |acc, bit| acc | ((((v >> bit) & 1) as u64) << (3 * bit)))
}

fn naive_morton(u: [u32; 3]) -> u64 {
    naive_spread(u[0]) | naive_spread(u[1]) << 1 | naive_spread(u[2]) << 2
}

fn morton_oracle() -> Outcome {
    let corners = [0u32, 1, (1 << 21) - 1];
    let mut cases: Vec<[u32; 3]> = Vec::new();
    for x in corners {
        for y in corners {
            for z in corners {
                cases.push([x, y, z]);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    cases.extend((0..100_000).map(|_| [0; 3].map(|_: u32| rng.gen_range(0..1u32 << 21))));
    for u in &cases {
        for &v in u {
            if spread_bits(v).unwrap() != naive_spread(v) {
                return outcome(false, format!("spread_bits({v}) differs from the reference"));
            }
        }
        let offset = [-5, 7, 1 << 20];
        let shifted = [0, 1, 2].map(|a| u[a] as i32 + offset[a]);
        if morton_encode(shifted, offset).unwrap().0 != naive_morton(*u) {
            return outcome(false, format!("morton_encode({u:?}) differs from the reference"));
        }
    }
    outcome(true, format!("{} coordinates match the per-bit reference", cases.len()))
}

fn shuffle_inverse() -> Outcome {
    let boundary = [0, 1, -1, 255, 256, i32::MAX, i32::MIN];
    let mut arrays: Vec<Vec<i32>> = vec![vec![]];
    let mut frontier = arrays.clone();
    for _ in 0..4 {
        frontier = frontier.iter().flat_map(|a| boundary.iter().map(move |&v| [a.as_slice(), &[v]].concat())).collect();
        arrays.extend(frontier.iter().cloned());
    }
    let exhaustive = arrays.len();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    arrays.extend((0..10_000).map(|_| {
        let n = rng.gen_range(0..64);
        (0..n).map(|_| rng.gen()).collect()
    }));
    for a in &arrays {
        let stream = byte_shuffle(a);
        let planes_ok = stream.as_bytes().len() == 4 * a.len()
            && (0..a.len()).all(|i| (0..4).all(|p| stream.as_bytes()[p * a.len() + i] == a[i].to_le_bytes()[p]));
        if !planes_ok || byte_unshuffle(&ShuffledStream::from_bytes(stream.into_bytes())).ok().as_ref() != Some(a) {
            return outcome(false, format!("round trip failed for {a:?}"));
        }
    }
    outcome(true, format!("{exhaustive} boundary arrays and 10000 random arrays round-trip"))
}

fn desk_frames() -> Vec<(String, PointCloud)> {
    [SynthKind::Plane, SynthKind::Corridor]
        .into_iter()
        .flat_map(|kind| {
            (0..3).map(move |seed| (format!("{}-{seed}", kind.name()), synth_cloud(kind, 34_000, 0.02, seed)))
        })
        .collect()
}

fn versus_gzip() -> Outcome {
    if !Backend::Lzma.is_available() || !Backend::Deflate.is_available() {
        return outcome(false, "needs both backends");
    }
    let model = PredictorModel::linear();
    let config = CodecConfig::default().with_scale(1e3);
    let mut worst = f64::INFINITY;
    for (_, cloud) in desk_frames() {
        let lizp = compress_cloud(&cloud, &config, &model).unwrap().len();
        let gzip = entropy::compress(Backend::Deflate, &lizip::ingest::raw_float_bytes(&cloud), 6).unwrap().len();
        worst = worst.min(1.0 - lizp as f64 / gzip as f64);
    }
    outcome(worst >= 0.30, format!("lizip-lzma at least {:.1}% smaller than gzip-raw (need 30%)", 100.0 * worst))
}

fn ablation_direction() -> Outcome {
    let models = [PredictorModel::linear(), PredictorModel::Mlp(Mlp::seeded(DEFAULT_CONTEXT_SIZE, 256, 3, 5).unwrap())];
    let mut best = f64::NEG_INFINITY;
    let mut shuffle_ok = true;
    let mut details = Vec::new();
    for model in models {
        let config = BenchConfig { codec: CodecConfig::default().with_scale(1e3), model, parallel: false };
        let mut worst = f64::INFINITY;
        for (_, cloud) in desk_frames() {
            let r = run_ablation_cloud(&cloud, &config).unwrap();
            worst = worst.min(1.0 - r.plus_prediction as f64 / r.quantized_entropy_only as f64);
            shuffle_ok &= r.plus_shuffle as f64 <= r.plus_prediction as f64 * 1.01;
        }
        details.push(format!("{} prediction {:+.1}%", config.model.kind(), -100.0 * worst));
        best = best.max(worst);
    }
    outcome(
        best >= 0.25 && shuffle_ok,
        format!("{} vs quantized-only (need -25%); shuffle within 1.01x: {shuffle_ok}", details.join(", ")),
    )
}

fn latency() -> Outcome {
    if !Backend::Deflate.is_available() {
        return outcome(false, "needs the deflate backend");
    }
    let model = PredictorModel::Mlp(Mlp::seeded(DEFAULT_CONTEXT_SIZE, 256, 3, 1).unwrap());
    let config = CodecConfig::default().with_backend(Backend::Deflate);
    let cloud = synth_cloud(SynthKind::Plane, 34_000, 0.02, 1);
    let mut best = Duration::MAX;
    for _ in 0..3 {
        let start = Instant::now();
        let packed = compress_cloud(&cloud, &config, &model).unwrap();
        let restored = decompress_cloud(&packed, &model).unwrap();
        assert_eq!(restored.len(), cloud.len());
        best = best.min(start.elapsed());
    }
    outcome(
        best < Duration::from_secs(1),
        format!(
            "encode+decode of 34000 points with the 9-256-256-256-3 MLP in {:.0} ms (limit 1000 ms)",
            best.as_secs_f64() * 1e3
        ),
    )
}

fn golden_fixtures() -> Outcome {
    let bytes = std::fs::read(fixture("plane40_lzma.lizp")).unwrap();
    if bytes[..4] != [0x4C, 0x49, 0x5A, 0x50] {
        return outcome(false, "LIZP fixture magic mismatch");
    }
    let header = LizipHeader::parse(&bytes).unwrap();
    if header.backend != Backend::Lzma
        || header.total_points != 40
        || header.block_count != 3
        || header.scale != 1e5
        || header.type_flags.bits() != 0x01
    {
        return outcome(false, format!("unexpected header {header:?}"));
    }
    let source = read_frame(&FrameSpec::new(FrameFormat::RawF32x4, fixture("plane40.bin"), true)).unwrap();
    let source = PointCloud::from_points(source.points().to_vec()).unwrap();
    let (expected, _) = morton_sort(&quantize(&source, 1e5).unwrap()).unwrap();
    if decompress_quantized(&bytes, &PredictorModel::linear()).ok() != Some(expected) {
        return outcome(false, "LIZP fixture does not decode to its source frame");
    }
    let net = load_lizm(&std::fs::read(fixture("tiny.lizm")).unwrap()).unwrap();
    let a = net.forward(&[-0.75, 2.0, 0.0, 1.5, 0.25, 0.0, 0.0, 0.0, 0.0]);
    let b = net.forward(&[2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    if a != [-0.75, 1.75, 3.0] || b != [2.0, 0.0, 3.0] {
        return outcome(false, format!("LIZM forward pass gave {a:?} and {b:?}"));
    }
    outcome(true, "LIZP fixture parses and decodes; LIZM fixture matches hand-computed outputs")
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("integer-domain losslessness", lossless_integer_domain),
        ("metric near-losslessness", metric_error_bound),
        ("morton oracle equivalence", morton_oracle),
        ("shuffle inverse", shuffle_inverse),
        ("compression vs gzip baseline", versus_gzip),
        ("ablation direction", ablation_direction),
        ("latency sanity", latency),
        ("format golden tests", golden_fixtures),
    ];
    let strict = std::env::var_os("LIZIP_ACCEPTANCE_STRICT").is_some();
    let mut fatal = 0;
    let mut passed = 0;
    for (idx, (name, check)) in criteria.iter().enumerate() {
        let id = idx + 1;
        let result = check();
        let note = if result.pass {
            passed += 1;
            ""
        } else if INFORMATIONAL.contains(&id) {
            " (informational)"
        } else if KNOWN_GAPS.contains(&id) && !strict {
            " (known gap)"
        } else {
            fatal += 1;
            ""
        };
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!("{verdict} [{id}] {name}: {}{note}", result.detail);
    }
    println!("{passed}/{} criteria passed", criteria.len());
    if fatal > 0 {
        std::process::exit(1);
    }
}
