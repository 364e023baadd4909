//! Reference systems shipped with the crate.
//!
//! * `heisenberg`: Heisenberg group, `D(X) = Y`, `D(Y) = X`, `D(Z) = 0`, controls `{X, Z}`.
//! * `heisenberg_rotation`: same group, `D(X) = Y`, `D(Y) = -X`, controls `{X, Z}`.
//! * `affine`: `[X, Y] = Y`, `D = 2 ad(X)`, control `X + Y`, `u in [-1, 1]`.
//! * `sl2`: `sl(2)` with drift `A g - g A`, control `B`.

use crate::error::{Error, Result};
use crate::io::{load_system, LoadedSystem};
use crate::tolerance::Tolerances;

pub const HEISENBERG: &str = include_str!("../corpus/heisenberg.json");
pub const HEISENBERG_ROTATION: &str = include_str!("../corpus/heisenberg_rotation.json");
pub const AFFINE: &str = include_str!("../corpus/affine.json");
pub const SL2: &str = include_str!("../corpus/sl2.json");

pub const NAMES: [&str; 4] = ["heisenberg", "heisenberg_rotation", "affine", "sl2"];

pub fn source(name: &str) -> Option<&'static str> {
    match name {
        "heisenberg" => Some(HEISENBERG),
        "heisenberg_rotation" => Some(HEISENBERG_ROTATION),
        "affine" => Some(AFFINE),
        "sl2" => Some(SL2),
        _ => None,
    }
}

pub fn load(name: &str, tol: &Tolerances) -> Result<LoadedSystem> {
    let text = source(name).ok_or_else(|| Error::InvalidInput(format!("unknown corpus system '{name}'")))?;
    load_system(text, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::StructureClass;
    use crate::io::ModelChoice;

    #[test]
    fn all_entries_load() {
        for name in NAMES {
            let l = load(name, &Tolerances::default()).unwrap();
            assert_eq!(l.name.as_deref(), Some(name));
            assert!(l.model(ModelChoice::Auto, &Tolerances::default()).is_ok(), "{name}");
        }
        assert!(load("nope", &Tolerances::default()).is_err());
    }

    #[test]
    fn classes() {
        let tol = Tolerances::default();
        let class = |n| load(n, &tol).unwrap().system.algebra().classify(&tol).class;
        assert_eq!(class("heisenberg"), StructureClass::Nilpotent);
        assert_eq!(class("affine"), StructureClass::Solvable);
        assert_eq!(class("sl2"), StructureClass::NonSolvable);
    }
}
