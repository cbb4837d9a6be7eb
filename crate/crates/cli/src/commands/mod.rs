pub mod bench_sampler;
pub mod bench_scaling;
pub mod hardness;
pub mod searchsim;
pub mod solve;
