use anyhow::{bail, Result};
use obscura_core::reference::run_selfcheck;

use crate::args::SelfcheckArgs;
use crate::output::emit;
use crate::{Ctx, Status};

pub fn run(a: SelfcheckArgs, ctx: &Ctx) -> Result<Status> {
    let seed = a.seed.or(ctx.config.seed).unwrap_or(0);
    let results = run_selfcheck(seed);
    for r in &results {
        eprintln!(
            "{} {} ({} cases, max error {:e}, tolerance {:e})",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.cases,
            r.max_error,
            r.tolerance
        );
    }
    emit(a.out.as_deref(), &ctx.writer.lines(&results)?)?;
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        bail!("{failed} self-check(s) failed");
    }
    Ok(Status::Success)
}
