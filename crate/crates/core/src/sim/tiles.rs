use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const TILE_PX: i32 = 16;
/// Levels are exactly one screen tall (224 px).
pub const LEVEL_ROWS: usize = 14;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Tile {
    #[default]
    Empty,
    Ground,
    Block,
    Spike,
}

impl Tile {
    pub fn is_solid(self) -> bool {
        matches!(self, Tile::Ground | Tile::Block)
    }

    pub fn code(self) -> char {
        match self {
            Tile::Empty => '.',
            Tile::Ground => '#',
            Tile::Block => '=',
            Tile::Spike => '^',
        }
    }

    pub fn from_code(c: char) -> Option<Tile> {
        Some(match c {
            '.' => Tile::Empty,
            '#' => Tile::Ground,
            '=' => Tile::Block,
            '^' => Tile::Spike,
            _ => return None,
        })
    }
}

/// Row-major tile map. Row 0 is the top of the screen.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TileGrid {
    width: usize,
    height: usize,
    cells: Vec<Tile>,
}

impl TileGrid {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec![Tile::Empty; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width_px(&self) -> i32 {
        self.width as i32 * TILE_PX
    }

    pub fn height_px(&self) -> i32 {
        self.height as i32 * TILE_PX
    }

    /// Tile lookup with boundary semantics used by physics: the left and
    /// right edges and the ceiling are solid, below the bottom row is open
    /// air (a pit).
    #[inline]
    pub fn at(&self, col: i32, row: i32) -> Tile {
        if col < 0 || col >= self.width as i32 || row < 0 {
            return Tile::Block;
        }
        if row >= self.height as i32 {
            return Tile::Empty;
        }
        self.cells[row as usize * self.width + col as usize]
    }

    pub fn set(&mut self, col: usize, row: usize, tile: Tile) {
        if col < self.width && row < self.height {
            self.cells[row * self.width + col] = tile;
        }
    }

    pub fn fill_column(&mut self, col: usize, rows: std::ops::RangeInclusive<usize>, tile: Tile) {
        for row in rows {
            self.set(col, row, tile);
        }
    }

    pub fn row(&self, row: usize) -> &[Tile] {
        &self.cells[row * self.width..(row + 1) * self.width]
    }

    /// Run-length encodes every row as `<count><code>` pairs, e.g. `"12.3#"`.
    pub fn to_rle_rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|r| {
                let mut out = String::new();
                let row = self.row(r);
                let mut i = 0;
                while i < row.len() {
                    let t = row[i];
                    let run = row[i..].iter().take_while(|&&x| x == t).count();
                    let _ = write!(out, "{}{}", run, t.code());
                    i += run;
                }
                out
            })
            .collect()
    }

    pub fn from_rle_rows(rows: &[String]) -> Result<Self> {
        let mut decoded: Vec<Vec<Tile>> = Vec::with_capacity(rows.len());
        for (r, line) in rows.iter().enumerate() {
            let mut row = Vec::new();
            let mut count = String::new();
            for c in line.chars() {
                if c.is_ascii_digit() {
                    count.push(c);
                    continue;
                }
                let tile =
                    Tile::from_code(c).ok_or_else(|| Error::Corrupt(format!("row {r}: unknown tile code {c:?}")))?;
                let n: usize = if count.is_empty() {
                    1
                } else {
                    count
                        .parse()
                        .map_err(|_| Error::Corrupt(format!("row {r}: bad run length {count:?}")))?
                };
                row.extend(std::iter::repeat_n(tile, n));
                count.clear();
            }
            if !count.is_empty() {
                return Err(Error::Corrupt(format!("row {r}: dangling run length")));
            }
            decoded.push(row);
        }
        let width = decoded.first().map_or(0, Vec::len);
        if decoded.iter().any(|r| r.len() != width) {
            return Err(Error::Corrupt("rows have different widths".into()));
        }
        Ok(Self {
            width,
            height: decoded.len(),
            cells: decoded.into_iter().flatten().collect(),
        })
    }

    /// Parses an ASCII picture (one line per row) using tile codes. Handy for
    /// hand-built test levels.
    pub fn from_ascii(picture: &str) -> Result<Self> {
        let rows: Vec<String> = picture
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| l.chars().map(|c| format!("1{c}")).collect())
            .collect();
        Self::from_rle_rows(&rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn boundaries() {
        let g = TileGrid::new(4, 3);
        assert_eq!(g.at(-1, 0), Tile::Block);
        assert_eq!(g.at(4, 0), Tile::Block);
        assert_eq!(g.at(0, -1), Tile::Block);
        assert_eq!(g.at(0, 3), Tile::Empty);
    }

    #[test]
    fn rle_format() {
        let g = TileGrid::from_ascii("..##=\n^^^^.").unwrap();
        assert_eq!(g.to_rle_rows(), vec!["2.2#1=", "4^1."]);
    }

    proptest! {
        #[test]
        fn rle_round_trip(cells in proptest::collection::vec(0u8..4, 1..200), width in 1usize..20) {
            let height = cells.len().div_ceil(width);
            let mut g = TileGrid::new(width, height);
            for (i, c) in cells.iter().enumerate() {
                let t = [Tile::Empty, Tile::Ground, Tile::Block, Tile::Spike][*c as usize];
                g.set(i % width, i / width, t);
            }
            prop_assert_eq!(TileGrid::from_rle_rows(&g.to_rle_rows()).unwrap(), g);
        }
    }
}
