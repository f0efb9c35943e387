//! Maps shipped with the crate.

use super::SimError;
use crate::map::OccupancyGrid;

/// A bundled map and the particle count it is meant to be run with.
#[derive(Debug, Clone, Copy)]
pub struct BundledMap {
    pub name: &'static str,
    pub text: &'static str,
    pub particles: usize,
    pub description: &'static str,
}

pub const BUNDLED: [BundledMap; 3] = [
    BundledMap {
        name: "symmetric",
        text: include_str!("../../maps/symmetric.map"),
        particles: 2000,
        description: "two rooms, identical under a half turn about the center",
    },
    BundledMap {
        name: "office",
        text: include_str!("../../maps/office.map"),
        particles: 2500,
        description: "six rooms off a central corridor",
    },
    BundledMap {
        name: "sparse",
        text: include_str!("../../maps/sparse.map"),
        particles: 2500,
        description: "one large hall with a handful of small features",
    },
];

pub fn bundled(name: &str) -> Option<&'static BundledMap> {
    BUNDLED.iter().find(|m| m.name == name)
}

/// Parses a bundled map by name, or reads and parses a map file when `name`
/// is not one of the bundled ones.
pub fn load(name: &str) -> Result<OccupancyGrid, SimError> {
    match bundled(name) {
        Some(m) => Ok(OccupancyGrid::parse(m.text)?),
        None => {
            let text = std::fs::read_to_string(name).map_err(|e| SimError::Io {
                path: name.into(),
                source: e,
            })?;
            Ok(OccupancyGrid::parse(&text)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::CellState;

    #[test]
    fn all_parse() {
        for m in &BUNDLED {
            let g = load(m.name).unwrap();
            assert!(g.count(CellState::Free) > 1000, "{}", m.name);
        }
    }

    #[test]
    fn symmetric_map_is_half_turn_invariant() {
        let g = load("symmetric").unwrap();
        let (w, h) = (g.width(), g.height());
        let cells = g.cells();
        for r in 0..h {
            for c in 0..w {
                assert_eq!(cells[r * w + c], cells[(h - 1 - r) * w + (w - 1 - c)]);
            }
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load("/nonexistent/x.map"), Err(SimError::Io { .. })));
    }
}
