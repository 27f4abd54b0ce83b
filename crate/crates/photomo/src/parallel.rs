//! Node-parallel table construction.

use photomo_core::measurement::NodeRecord;
use photomo_core::{DensityMatrix, ForwardModel, MeasurementTable, PhaseSpaceGrid, Result};
use rayon::prelude::*;

/// Same result as [`photomo_core::build_table`], with nodes evaluated on the rayon pool.
///
/// Every node draws from its own random stream, so the output does not depend on the
/// number of threads or on scheduling.
pub fn build_table_parallel(
    rho: &DensityMatrix,
    grid: &PhaseSpaceGrid,
    model: &ForwardModel,
) -> Result<MeasurementTable> {
    let prepared = model.prepare(rho)?;
    let records = grid
        .nodes()
        .par_iter()
        .enumerate()
        .map(|(j, a)| prepared.node(j, *a))
        .collect::<Result<Vec<NodeRecord>>>()?;
    MeasurementTable::from_records(grid, &prepared, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use photomo_core::{build_state, build_table, make_grid, Shots, StateSpec};

    #[test]
    fn matches_sequential() {
        let rho = build_state(&StateSpec::Thermal(0.4), 16).unwrap().rho;
        let grid = make_grid(3.5, 6, 8).unwrap();
        for shots in [Shots::Exact, Shots::Count(2000)] {
            let model = ForwardModel {
                eta: 0.9,
                shots,
                seed: 17,
                ..ForwardModel::ideal(7)
            };
            assert_eq!(
                build_table_parallel(&rho, &grid, &model).unwrap(),
                build_table(&rho, &grid, &model).unwrap()
            );
        }
    }
}
