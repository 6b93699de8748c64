//! Console button vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

/// The twelve console buttons, in canonical vector order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Button {
    B = 0,
    A = 1,
    Mode = 2,
    Start = 3,
    Up = 4,
    Down = 5,
    Left = 6,
    Right = 7,
    C = 8,
    Y = 9,
    X = 10,
    Z = 11,
}

impl Button {
    pub const ALL: [Button; 12] = [
        Button::B,
        Button::A,
        Button::Mode,
        Button::Start,
        Button::Up,
        Button::Down,
        Button::Left,
        Button::Right,
        Button::C,
        Button::Y,
        Button::X,
        Button::Z,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Button::B => "B",
            Button::A => "A",
            Button::Mode => "MODE",
            Button::Start => "START",
            Button::Up => "UP",
            Button::Down => "DOWN",
            Button::Left => "LEFT",
            Button::Right => "RIGHT",
            Button::C => "C",
            Button::Y => "Y",
            Button::X => "X",
            Button::Z => "Z",
        }
    }

    pub fn from_name(name: &str) -> Option<Button> {
        Button::ALL.into_iter().find(|b| b.name().eq_ignore_ascii_case(name))
    }
}

/// A 12-entry binary button vector packed into the low 12 bits of a `u16`.
///
/// Bit `i` is button `i` of [`Button::ALL`]; bits 12..16 are always zero.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct Buttons(u16);

impl Buttons {
    pub const NONE: Buttons = Buttons(0);
    pub const MASK: u16 = 0x0FFF;

    pub fn from_mask(mask: u16) -> Option<Buttons> {
        (mask & !Self::MASK == 0).then_some(Buttons(mask))
    }

    pub fn mask(self) -> u16 {
        self.0
    }

    pub fn from_slice(buttons: &[Button]) -> Buttons {
        buttons.iter().fold(Buttons::NONE, |acc, &b| acc.with(b))
    }

    /// Builds from a 12-entry 0/1 vector in canonical order.
    pub fn from_vector(bits: &[u8; 12]) -> Option<Buttons> {
        let mut mask = 0u16;
        for (i, &bit) in bits.iter().enumerate() {
            match bit {
                0 => {}
                1 => mask |= 1 << i,
                _ => return None,
            }
        }
        Some(Buttons(mask))
    }

    pub fn to_vector(self) -> [u8; 12] {
        let mut out = [0u8; 12];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = ((self.0 >> i) & 1) as u8;
        }
        out
    }

    pub const fn with(self, b: Button) -> Buttons {
        Buttons(self.0 | (1 << b as u16))
    }

    pub const fn pressed(self, b: Button) -> bool {
        self.0 & (1 << b as u16) != 0
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }
}

impl TryFrom<u16> for Buttons {
    type Error = String;
    fn try_from(mask: u16) -> Result<Self, Self::Error> {
        Buttons::from_mask(mask).ok_or_else(|| format!("button mask {mask:#06x} sets bits above 11"))
    }
}

impl From<Buttons> for u16 {
    fn from(b: Buttons) -> u16 {
        b.0
    }
}

impl fmt::Debug for Buttons {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = Button::ALL
            .into_iter()
            .filter(|&b| self.pressed(b))
            .map(Button::name)
            .collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}
