//! CSV export of solved measures.

use std::io::Write;

use super::solver::EquilibriumSolution;
use crate::error::Result;

pub const CSV_HEADER: &str = "cell_midpoint,weight,density,effective_potential";

pub fn write_solution_csv(solution: &EquilibriumSolution, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let mu = &solution.mu;
    let dx = mu.cell_width();
    for (c, (w, f)) in mu.weights().iter().zip(&solution.effective_potential).enumerate() {
        writeln!(out, "{},{},{},{}", mu.midpoint(c), w, w / dx, f)?;
    }
    Ok(())
}
