use std::str::FromStr;

use crate::buttons::{Button, Buttons};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionMapKind {
    EightEssential,
    SevenDqn,
}

impl FromStr for ActionMapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eight_essential" | "eight" => Ok(ActionMapKind::EightEssential),
            "seven_dqn" | "seven" => Ok(ActionMapKind::SevenDqn),
            other => Err(Error::config(format!("unknown action map {other:?}"))),
        }
    }
}

/// Dense index → button combination table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteActionMap {
    combos: Vec<Buttons>,
}

const fn combo(buttons: &[Button]) -> Buttons {
    let mut out = Buttons::NONE;
    let mut i = 0;
    while i < buttons.len() {
        out = out.with(buttons[i]);
        i += 1;
    }
    out
}

use Button::{Down, Left, Right, B};

const ESSENTIAL: [Buttons; 8] = [
    combo(&[]),
    combo(&[Left]),
    combo(&[Right]),
    combo(&[Left, Down]),
    combo(&[Right, Down]),
    combo(&[Down]),
    combo(&[Down, B]),
    combo(&[B]),
];

impl DiscreteActionMap {
    pub fn new(combos: Vec<Buttons>) -> Result<Self> {
        if combos.is_empty() {
            return Err(Error::config("action map needs at least one combination"));
        }
        Ok(Self { combos })
    }

    pub fn of_kind(kind: ActionMapKind) -> Self {
        match kind {
            ActionMapKind::EightEssential => Self::eight_essential(),
            ActionMapKind::SevenDqn => Self::seven_dqn(),
        }
    }

    /// `{}, {LEFT}, {RIGHT}, {LEFT,DOWN}, {RIGHT,DOWN}, {DOWN}, {DOWN,B}, {B}`.
    pub fn eight_essential() -> Self {
        Self {
            combos: ESSENTIAL.to_vec(),
        }
    }

    /// The essential set without the empty combination.
    pub fn seven_dqn() -> Self {
        Self {
            combos: ESSENTIAL[1..].to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.combos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combos.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<Buttons> {
        self.combos.get(index).copied()
    }

    pub fn buttons(&self, index: usize) -> Result<Buttons> {
        self.get(index)
            .ok_or_else(|| Error::config(format!("action index {index} out of range for a map of {}", self.len())))
    }

    pub fn combos(&self) -> &[Buttons] {
        &self.combos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn essential_set_order() {
        let m = DiscreteActionMap::eight_essential();
        assert_eq!(m.len(), 8);
        assert_eq!(m.buttons(0).unwrap(), Buttons::NONE);
        assert_eq!(m.buttons(7).unwrap().to_vector(), [1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(format!("{:?}", m.buttons(6).unwrap()), "{B, DOWN}");
        assert!(m.buttons(8).is_err());
    }

    #[test]
    fn dqn_set_drops_the_empty_combo() {
        let m = DiscreteActionMap::seven_dqn();
        assert_eq!(m.len(), 7);
        assert_eq!(m.combos(), &DiscreteActionMap::eight_essential().combos()[1..]);
        assert!(m.combos().iter().all(|b| !b.pressed(Button::Up)));
    }
}
