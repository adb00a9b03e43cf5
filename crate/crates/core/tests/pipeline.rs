use lizip::{
    compress_cloud, decompress_quantized, inspect, morton_sort, quantize, Backend, CodecConfig, Mlp, PointCloud,
    PredictorModel,
};
use proptest::prelude::*;

fn cloud_strategy() -> impl Strategy<Value = PointCloud> {
    (0usize..300, any::<bool>()).prop_flat_map(|(n, intensity)| {
        let points = proptest::collection::vec(proptest::array::uniform3(-8.0f32..8.0), n);
        let values = proptest::collection::vec(0.0f32..=1.0, n);
        (points, values).prop_map(move |(p, v)| PointCloud::new(p, intensity.then_some(v)).unwrap())
    })
}

fn models() -> Vec<PredictorModel> {
    vec![
        PredictorModel::linear(),
        PredictorModel::linear_with_context(5).unwrap(),
        PredictorModel::Mlp(Mlp::seeded(3, 16, 2, 11).unwrap()),
    ]
}

fn backends() -> Vec<Backend> {
    Backend::ALL.into_iter().filter(|b| b.is_available()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decode_is_the_sorted_grid(
        cloud in cloud_strategy(),
        block in 5usize..120,
        scale in prop_oneof![Just(1e2f32), Just(1e3), Just(1e5)],
        model_idx in 0usize..3,
        backend_idx in 0usize..2,
    ) {
        let model = &models()[model_idx];
        let backends = backends();
        let backend = backends[backend_idx % backends.len()];
        let config = CodecConfig::default().with_backend(backend).with_scale(scale).with_block_size(block);
        let packed = compress_cloud(&cloud, &config, model).unwrap();

        let summary = inspect(&packed).unwrap();
        prop_assert_eq!(summary.header.total_points as usize, cloud.len());
        prop_assert_eq!(summary.blocks.len(), cloud.len().div_ceil(block));
        prop_assert_eq!(summary.file_len, packed.len());

        let (expected, _) = morton_sort(&quantize(&cloud, scale).unwrap()).unwrap();
        prop_assert_eq!(decompress_quantized(&packed, model).unwrap(), expected);
    }

    #[test]
    fn damaged_containers_never_panic(cloud in cloud_strategy(), flips in proptest::collection::vec((any::<usize>(), 1u8..), 1..4)) {
        let model = PredictorModel::linear();
        let mut packed = compress_cloud(&cloud, &CodecConfig::default().with_block_size(64), &model).unwrap();
        for (at, mask) in flips {
            let at = at % packed.len();
            packed[at] ^= mask;
        }
        let _ = decompress_quantized(&packed, &model);
        let _ = inspect(&packed);
    }

    #[test]
    fn truncated_containers_are_rejected(cloud in cloud_strategy(), cut in any::<usize>()) {
        let model = PredictorModel::linear();
        let packed = compress_cloud(&cloud, &CodecConfig::default(), &model).unwrap();
        let cut = cut % packed.len();
        prop_assert!(decompress_quantized(&packed[..cut], &model).is_err());
        prop_assert!(inspect(&packed[..cut]).is_err());
    }
}

#[test]
fn trailing_garbage_is_rejected() {
    let cloud = PointCloud::from_points(vec![[0.0, 0.0, 0.0]; 10]).unwrap();
    let model = PredictorModel::linear();
    let mut packed = compress_cloud(&cloud, &CodecConfig::default(), &model).unwrap();
    packed.push(0);
    assert!(inspect(&packed).is_err());
    assert!(decompress_quantized(&packed, &model).is_err());
}

#[test]
fn decoding_with_another_model_does_not_reproduce_the_cloud() {
    // The container does not identify its model, so a mismatch yields wrong points rather than an error.
    let cloud =
        PointCloud::from_points((0..50).map(|i| [i as f32 * 0.01, (i * i) as f32 * 1e-3, 0.0]).collect()).unwrap();
    let packed = compress_cloud(&cloud, &CodecConfig::default(), &PredictorModel::linear()).unwrap();
    let (expected, _) = morton_sort(&quantize(&cloud, 1e5).unwrap()).unwrap();
    for other in
        [PredictorModel::linear_with_context(4).unwrap(), PredictorModel::Mlp(Mlp::seeded(3, 8, 1, 1).unwrap())]
    {
        if let Ok(decoded) = decompress_quantized(&packed, &other) {
            assert_ne!(decoded, expected);
        }
    }
}
