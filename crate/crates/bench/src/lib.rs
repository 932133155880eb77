//! Fixtures shared by the benchmarks.

use shardmatch_core::matching::{sample_profile, TactileProfile};
use shardmatch_core::synth::{generate_scene, SceneBundle, SceneSpec, ShapeKind};

/// The seed-42 six-fragment square scene.
pub fn scene() -> SceneBundle {
    generate_scene(&SceneSpec::new(ShapeKind::Square, 6, 42)).expect("bench scene")
}

/// Profiles of the two presses on the first crack.
pub fn mate_profiles(b: &SceneBundle) -> (TactileProfile, TactileProfile) {
    let p = |i: usize| sample_profile(&b.scene, &b.samples[i]).expect("profile");
    (p(0), p(1))
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_build() {
        let b = super::scene();
        let (p, q) = super::mate_profiles(&b);
        assert_eq!(b.samples[0].edge, b.samples[1].edge);
        assert!(!p.edge.is_empty() && !q.edge.is_empty());
    }
}
