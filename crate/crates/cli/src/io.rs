//! File formats read and written by the command-line tool.
//!
//! All indices are 0-based.

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tulp::lp::IntegralityReport;
use tulp::models::{Allocation, KMedoidInstance, Model, NonExpendableInstance, TransportInstance};
use tulp::tu::SignMatrix;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    Expendable,
    NonExpendable,
}

/// Expendable or non-expendable allocation instance. For the non-expendable
/// kind `supplies` are per-shipment capacities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportFile {
    pub kind: TransportKind,
    pub supplies: Vec<u64>,
    pub demands: Vec<u64>,
    /// Row-major, one row per supply.
    pub costs: Vec<Vec<f64>>,
}

impl TransportFile {
    pub fn to_model(&self) -> Model {
        match self.kind {
            TransportKind::Expendable => Model::Expendable(TransportInstance {
                supplies: self.supplies.clone(),
                demands: self.demands.clone(),
                costs: self.costs.clone(),
            }),
            TransportKind::NonExpendable => Model::NonExpendable(NonExpendableInstance {
                capacities: self.supplies.clone(),
                demands: self.demands.clone(),
                costs: self.costs.clone(),
            }),
        }
    }

    pub fn from_model(model: &Model) -> Option<Self> {
        match model {
            Model::Expendable(i) => Some(Self {
                kind: TransportKind::Expendable,
                supplies: i.supplies.clone(),
                demands: i.demands.clone(),
                costs: i.costs.clone(),
            }),
            Model::NonExpendable(i) => Some(Self {
                kind: TransportKind::NonExpendable,
                supplies: i.capacities.clone(),
                demands: i.demands.clone(),
                costs: i.costs.clone(),
            }),
            Model::KMedoid(_) => None,
        }
    }
}

/// k-medoid instance given either as planar points or as a distance matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KMedoidFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl KMedoidFile {
    /// `k` from the command line wins over the file.
    pub fn to_instance(&self, k: Option<usize>) -> Result<KMedoidInstance, CliError> {
        let k = k.or(self.k).ok_or_else(|| CliError::Input("k is neither in the file nor given with --k".into()))?;
        let inst = match (&self.points, &self.distances) {
            (Some(points), None) => {
                let pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
                KMedoidInstance::from_points(&pts, k)?
            }
            (None, Some(d)) => KMedoidInstance::new(d.clone(), k)?,
            _ => return Err(CliError::Input("give exactly one of \"points\" and \"distances\"".into())),
        };
        Ok(inst)
    }
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|source| CliError::Io { path: path.into(), source })?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

pub fn parse_transport(text: &str) -> Result<TransportFile, CliError> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_kmedoid(text: &str) -> Result<KMedoidFile, CliError> {
    Ok(serde_json::from_str(text)?)
}

/// Comma-separated integer rows without a header.
pub fn parse_matrix_csv(text: &str) -> Result<SignMatrix, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                field.parse::<i64>().map_err(|_| CliError::Input(format!("entry ({r}, {c}) = {field:?} is not an integer")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input("matrix file has no rows".into()));
    }
    Ok(SignMatrix::from_rows(rows)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AllocationJson {
    Grid(Vec<Vec<u64>>),
    Medoids { medoids: Vec<usize>, assignment: Vec<usize> },
}

impl From<Allocation> for AllocationJson {
    fn from(a: Allocation) -> Self {
        match a {
            Allocation::Transport { grid } => AllocationJson::Grid(grid),
            Allocation::KMedoid { medoids, assignment } => AllocationJson::Medoids { medoids, assignment },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralityJson {
    pub is_integral: bool,
    pub max_deviation: f64,
}

impl From<&IntegralityReport> for IntegralityJson {
    fn from(r: &IntegralityReport) -> Self {
        Self { is_integral: r.is_integral, max_deviation: r.max_fractional_deviation }
    }
}

/// Result of a solve command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// `null` when there is no optimum.
    pub objective: Option<f64>,
    /// `optimal`, `infeasible`, `unbounded` or `fractional`.
    pub status: String,
    pub solver: String,
    pub allocation: Option<AllocationJson>,
    pub integrality: IntegralityJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn transport_json_layout() {
        let text = r#"{"kind": "non_expendable", "supplies": [2, 1], "demands": [3, 2], "costs": [[1, 4], [2, 3]]}"#;
        let file = parse_transport(text).unwrap();
        assert_eq!(file.kind, TransportKind::NonExpendable);
        match file.to_model() {
            Model::NonExpendable(i) => assert_eq!(i.capacities, vec![2, 1]),
            m => panic!("{m:?}"),
        }
        assert!(parse_transport(r#"{"kind": "expendable", "supplies": [1], "demands": [1]}"#).is_err());
        assert!(parse_transport(r#"{"kind": "other", "supplies": [1], "demands": [1], "costs": [[1]]}"#).is_err());
    }

    #[test]
    fn kmedoid_json_variants() {
        let f = parse_kmedoid(r#"{"points": [[0, 0], [3, 4]], "k": 1}"#).unwrap();
        let inst = f.to_instance(None).unwrap();
        assert_eq!(inst.distances[0][1], 5.0);
        assert_eq!(f.to_instance(Some(2)).unwrap().k, 2);
        let f = parse_kmedoid(r#"{"distances": [[0, 1], [1, 0]]}"#).unwrap();
        assert!(matches!(f.to_instance(None), Err(CliError::Input(_))));
        let f = parse_kmedoid(r#"{"distances": [[0, 1], [2, 0]], "k": 1}"#).unwrap();
        assert!(matches!(f.to_instance(None), Err(CliError::Model(_))));
        let both = parse_kmedoid(r#"{"points": [[0, 0]], "distances": [[0]], "k": 1}"#).unwrap();
        assert!(matches!(both.to_instance(None), Err(CliError::Input(_))));
    }

    #[test]
    fn csv_matrices() {
        let m = parse_matrix_csv("1, 1\n-1, 1\n").unwrap();
        assert_eq!(m.to_rows(), vec![vec![1, 1], vec![-1, 1]]);
        assert!(matches!(parse_matrix_csv("1,2\n0,1\n"), Err(CliError::Tu(_))));
        assert!(matches!(parse_matrix_csv("1,0\n1\n"), Err(CliError::Tu(_))));
        assert!(matches!(parse_matrix_csv("1,x\n"), Err(CliError::Input(_))));
        assert!(matches!(parse_matrix_csv(""), Err(CliError::Input(_))));
    }

    #[test]
    fn allocation_output_shapes() {
        let grid = serde_json::to_value(AllocationJson::from(Allocation::Transport { grid: vec![vec![1, 0]] })).unwrap();
        assert_eq!(grid, serde_json::json!([[1, 0]]));
        let med = AllocationJson::from(Allocation::KMedoid { medoids: vec![0], assignment: vec![0, 0] });
        assert_eq!(serde_json::to_value(med).unwrap(), serde_json::json!({"medoids": [0], "assignment": [0, 0]}));
    }

    fn transport_file() -> impl Strategy<Value = TransportFile> {
        (1usize..4, 1usize..4).prop_flat_map(|(m, n)| {
            (
                prop_oneof![Just(TransportKind::Expendable), Just(TransportKind::NonExpendable)],
                prop::collection::vec(0u64..1000, m),
                prop::collection::vec(0u64..1000, n),
                prop::collection::vec(prop::collection::vec(0.0f64..1e6, n), m),
            )
                .prop_map(|(kind, supplies, demands, costs)| TransportFile { kind, supplies, demands, costs })
        })
    }

    fn kmedoid_file() -> impl Strategy<Value = KMedoidFile> {
        let points = prop::collection::vec(prop::array::uniform2(-1e3f64..1e3), 1..6)
            .prop_map(|p| KMedoidFile { points: Some(p), distances: None, k: None });
        let dists = prop::collection::vec(prop::collection::vec(0.0f64..10.0, 3), 3)
            .prop_map(|d| KMedoidFile { points: None, distances: Some(d), k: None });
        (prop_oneof![points, dists], prop::option::of(1usize..4)).prop_map(|(mut f, k)| {
            f.k = k;
            f
        })
    }

    proptest! {
        #[test]
        fn transport_files_survive_a_round_trip(file in transport_file()) {
            let text = serde_json::to_string(&file).unwrap();
            prop_assert_eq!(parse_transport(&text).unwrap(), file.clone());
            let model = file.to_model();
            prop_assert_eq!(TransportFile::from_model(&model), Some(file));
        }

        #[test]
        fn kmedoid_files_survive_a_round_trip(file in kmedoid_file()) {
            let text = serde_json::to_string_pretty(&file).unwrap();
            prop_assert_eq!(parse_kmedoid(&text).unwrap(), file);
        }
    }
}
