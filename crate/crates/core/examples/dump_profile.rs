//! Print a built-in platform profile as JSON, as a starting point for
//! custom latency-model files:
//!
//!     cargo run -p tsnsim --example dump_profile -- C2 > my-model.json

use tsnsim::engine::PlatformProfile;

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "C2".to_string());
    match PlatformProfile::by_name(&name) {
        Some(p) => println!("{}", serde_json::to_string_pretty(&p).unwrap()),
        None => {
            eprintln!(
                "unknown profile {name:?}; choose one of {:?}",
                PlatformProfile::PRESET_NAMES
            );
            std::process::exit(2);
        }
    }
}
