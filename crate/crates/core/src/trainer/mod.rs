//! Desk-scale training: a pixel-wise saliency head, synthetic scenes with
//! scribbles, and an SGD loop driven by the composite loss.

mod head;
mod scene;
mod schedule;
mod train;

pub use head::{predict, Activations, PixelInputs, SaliencyHead};
pub use scene::{
    anchor_directions, generate_benchmark, generate_scene, region_map, standard_benchmark, Benchmark,
    Primitive, SceneObject, SceneSpec, SyntheticScene, BENCHMARK_SEED, BENCHMARK_TEST, BENCHMARK_TRAIN,
};
pub use schedule::{triangular_lr, TrainConfig, DESK_LR_MAX};
pub use train::{loss_and_grad, mean_iou, train, EpochLog, TrainOutcome, TrainingSample};
