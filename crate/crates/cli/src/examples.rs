//! Configs shipped under `configs/`, embedded so `list-examples` works from an installed binary.

pub struct Example {
    pub path: &'static str,
    pub text: &'static str,
    /// Whether a correct build is expected to exit 0.
    pub passes: bool,
}

macro_rules! example {
    ($path:literal, $passes:expr) => {
        Example {
            path: $path,
            text: include_str!(concat!("../../../", $path)),
            passes: $passes,
        }
    };
}

pub const EXAMPLES: &[Example] = &[
    example!("configs/linear_translation_losc.json", true),
    example!("configs/perturbed_translation_fixed_point.json", true),
    example!("configs/perturbed_translation_differential.json", true),
    example!("configs/translation_sweep.json", true),
    example!("configs/linear_translation_memory.json", true),
    example!("configs/stochastic_weak_multistart.json", true),
    example!("configs/stochastic_weak_audit.json", true),
    example!("configs/doubling_particles.json", true),
    example!("configs/kernel_particles.json", true),
    // no admissible strong pair exists on the grid; exits 1 with the measured norms
    example!("configs/findings/stochastic_strong_regime.json", false),
];
