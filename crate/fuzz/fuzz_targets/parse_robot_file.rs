#![no_main]
use libfuzzer_sys::fuzz_target;
use rotom_core::robot_file::{parse_robot_bytes, parse_robot_str, to_robot_json};

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = parse_robot_bytes(data) {
        // Anything accepted must survive a write/read round trip.
        let again = parse_robot_str(&to_robot_json(&model)).expect("emitted robot file parses");
        assert_eq!(again.joints(), model.joints());
        assert_eq!(again.links(), model.links());
        assert_eq!(again.task_dim(), model.task_dim());
        let drift = again.base_frame().inverse() * model.base_frame();
        assert!(
            drift.translation.vector.norm()
                <= 1e-12 * (1.0 + model.base_frame().translation.vector.norm())
        );
        assert!(drift.rotation.angle() <= 1e-12);
    }
});
