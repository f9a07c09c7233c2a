//! Run the oracle suite with a handful of instances per property and print
//! the table the `verify` subcommand shows.

use ouda::verify::{run_verification, VerifyOptions};

fn main() -> ouda::Result<()> {
    let report = run_verification(&VerifyOptions {
        seed: 1,
        instances: Some(10),
        inject_fault: false,
    })?;
    println!("{report}");
    let broken = run_verification(&VerifyOptions {
        seed: 1,
        instances: Some(3),
        inject_fault: true,
    })?;
    for c in broken.failures() {
        println!(
            "with the cross-term sign flipped, {} fails (worst {:.3e})",
            c.property, c.worst
        );
    }
    Ok(())
}
