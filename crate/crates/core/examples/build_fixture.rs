//! Regenerates the bundled review fixture.
//!
//! ```text
//! cargo run -p provkg-core --example build_fixture [-- <out-dir>]
//! ```

#[path = "../tests/support/fixture_gen.rs"]
mod fixture_gen;

use std::path::PathBuf;

use provkg_core::prompts::PromptRegistry;

fn main() -> std::io::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    fixture_gen::write_all(&dir, &PromptRegistry::default())?;
    println!("wrote fixture to {}", dir.display());
    Ok(())
}
