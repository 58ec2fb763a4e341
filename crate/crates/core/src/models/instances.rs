use serde::{Deserialize, Serialize};

use super::ModelError;

fn check_costs(costs: &[Vec<f64>], m: usize, n: usize) -> Result<(), ModelError> {
    if costs.len() != m {
        return Err(ModelError::CostShape { rows: m, cols: n, row: costs.len().min(m), got: 0 });
    }
    for (i, row) in costs.iter().enumerate() {
        if row.len() != n {
            return Err(ModelError::CostShape { rows: m, cols: n, row: i, got: row.len() });
        }
        if let Some(j) = row.iter().position(|c| !c.is_finite() || *c < 0.0) {
            return Err(ModelError::BadCost { i, j, value: row[j] });
        }
    }
    Ok(())
}

/// Expendable resources: centre `i` holds `supplies[i]` units in total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportInstance {
    pub supplies: Vec<u64>,
    pub demands: Vec<u64>,
    /// `costs[i][j]`: processing plus transportation time per unit.
    pub costs: Vec<Vec<f64>>,
}

impl TransportInstance {
    pub fn new(supplies: Vec<u64>, demands: Vec<u64>, costs: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let inst = Self { supplies, demands, costs };
        inst.validate()?;
        Ok(inst)
    }

    pub fn num_sources(&self) -> usize {
        self.supplies.len()
    }

    pub fn num_destinations(&self) -> usize {
        self.demands.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.supplies.is_empty() {
            return Err(ModelError::Empty("relief centres"));
        }
        if self.demands.is_empty() {
            return Err(ModelError::Empty("incident points"));
        }
        check_costs(&self.costs, self.num_sources(), self.num_destinations())?;
        let supply: u64 = self.supplies.iter().sum();
        let demand: u64 = self.demands.iter().sum();
        if supply < demand {
            return Err(ModelError::InsufficientSupply { supply, demand });
        }
        Ok(())
    }
}

/// Non-expendable resources: centre `i` can send at most `capacities[i]`
/// units to each destination, independently of what it sends elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonExpendableInstance {
    pub capacities: Vec<u64>,
    pub demands: Vec<u64>,
    pub costs: Vec<Vec<f64>>,
}

impl NonExpendableInstance {
    pub fn new(capacities: Vec<u64>, demands: Vec<u64>, costs: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let inst = Self { capacities, demands, costs };
        inst.validate()?;
        Ok(inst)
    }

    pub fn num_sources(&self) -> usize {
        self.capacities.len()
    }

    pub fn num_destinations(&self) -> usize {
        self.demands.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.capacities.is_empty() {
            return Err(ModelError::Empty("relief centres"));
        }
        if self.demands.is_empty() {
            return Err(ModelError::Empty("incident points"));
        }
        check_costs(&self.costs, self.num_sources(), self.num_destinations())?;
        let capacity: u64 = self.capacities.iter().sum();
        if let Some(j) = self.demands.iter().position(|&d| d > capacity) {
            return Err(ModelError::DemandExceedsCapacity { destination: j, demand: self.demands[j], capacity });
        }
        Ok(())
    }
}

impl From<TransportInstance> for NonExpendableInstance {
    fn from(t: TransportInstance) -> Self {
        Self { capacities: t.supplies, demands: t.demands, costs: t.costs }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMedoidInstance {
    pub distances: Vec<Vec<f64>>,
    pub k: usize,
}

impl KMedoidInstance {
    pub fn new(distances: Vec<Vec<f64>>, k: usize) -> Result<Self, ModelError> {
        let inst = Self { distances, k };
        inst.validate()?;
        Ok(inst)
    }

    /// Euclidean distance matrix of planar points.
    pub fn from_points(points: &[(f64, f64)], k: usize) -> Result<Self, ModelError> {
        let distances = points
            .iter()
            .map(|&(ax, ay)| points.iter().map(|&(bx, by)| (ax - bx).hypot(ay - by)).collect())
            .collect();
        Self::new(distances, k)
    }

    pub fn n(&self) -> usize {
        self.distances.len()
    }

    /// Rejects asymmetric or non-zero-diagonal input instead of repairing it.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.n();
        if n == 0 {
            return Err(ModelError::Empty("points"));
        }
        for (i, row) in self.distances.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::DistanceShape { n, row: i, got: row.len() });
            }
            if let Some(j) = row.iter().position(|d| !d.is_finite() || *d < 0.0) {
                return Err(ModelError::BadDistance { i, j, value: row[j] });
            }
            if row[i] != 0.0 {
                return Err(ModelError::NonZeroDiagonal { i, value: row[i] });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (self.distances[i][j], self.distances[j][i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(ModelError::Asymmetric { i, j });
                }
            }
        }
        if self.k == 0 || self.k > n {
            return Err(ModelError::InvalidK { k: self.k, n });
        }
        Ok(())
    }
}
