//! Prints the default simulator configuration in `key = value` form.

fn main() {
    print!("{}", sensorscene_core::sim::SimConfig::default().to_kv_string());
}
