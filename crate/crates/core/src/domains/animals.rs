//! Box patterns of chickens, pigs and pebbles on a 7×7 grid.
//!
//! A program draws a rectangle: cells within `thickness` of its edge hold the
//! outside object, deeper cells the inside object, and everything beyond the
//! rectangle is a pebble. Animals are coloured by `A2(A1(x, y)) mod 3`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

pub const SIZE: usize = 7;
pub const CELLS: usize = SIZE * SIZE;
/// Pebble plus two animals in three colours.
pub const CELL_VALUES: usize = 7;
pub const RULES: usize = 12;
pub const ENCODING_DIM: usize = RULES * 7;

const TOKENS: [&str; CELL_VALUES] = ["P", "Cr", "Cg", "Cb", "Pr", "Pg", "Pb"];
const OUTSIDE: [&str; 2] = ["chicken", "pig"];
const INSIDE: [&str; 3] = ["chicken", "pig", "pebble"];
const A1_NAMES: [&str; 3] = ["x", "y", "x+y"];
const A2_NAMES: [&str; 6] = ["0", "1", "2", "z%2", "z%2+1", "2*(z%2)"];

/// One grid cell: 0 is a pebble, `1 + 3·animal + colour` otherwise
/// (animal 0 = chicken, 1 = pig; colour 0/1/2 = red/green/blue).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell(pub u8);

impl Cell {
    pub const PEBBLE: Cell = Cell(0);

    pub fn token(self) -> &'static str {
        TOKENS[self.0 as usize]
    }

    pub fn from_token(token: &str) -> Option<Self> {
        TOKENS.iter().position(|t| *t == token).map(|i| Cell(i as u8))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnimalsProgram {
    pub left: u8,
    pub right: u8,
    pub top: u8,
    pub bottom: u8,
    /// 1..=3.
    pub thickness: u8,
    /// Index into `[chicken, pig]`.
    pub outside: u8,
    /// Index into `[chicken, pig, pebble]`.
    pub inside: u8,
    /// Index into `[x, y, x+y]`.
    pub a1: u8,
    /// Index into `[0, 1, 2, z%2, z%2+1, 2*(z%2)]`.
    pub a2: u8,
}

impl AnimalsProgram {
    /// From the 12-rule production sequence
    /// `[Program, Shape, Left, Right, Top, Bottom, Thickness, O, I, Colour, A1, A2]`,
    /// each entry the index of the chosen expansion (Thickness 0 means `1`).
    pub fn from_productions(p: [u8; RULES]) -> Result<Self> {
        if p[0] != 0 || p[1] != 0 || p[9] != 0 {
            return Err(Error::MalformedProgram("single-expansion rules must be 0".into()));
        }
        let program = Self {
            left: p[2],
            right: p[3],
            top: p[4],
            bottom: p[5],
            thickness: p[6] + 1,
            outside: p[7],
            inside: p[8],
            a1: p[10],
            a2: p[11],
        };
        program.validate()?;
        Ok(program)
    }

    pub fn productions(&self) -> [u8; RULES] {
        [
            0,
            0,
            self.left,
            self.right,
            self.top,
            self.bottom,
            self.thickness - 1,
            self.outside,
            self.inside,
            0,
            self.a1,
            self.a2,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let s = SIZE as u8;
        let ok = self.left < s
            && self.right < s
            && self.top < s
            && self.bottom < s
            && self.left <= self.right
            && self.top <= self.bottom
            && (1..=3).contains(&self.thickness)
            && self.outside < 2
            && self.inside < 3
            && self.a1 < 3
            && self.a2 < 6;
        if ok {
            Ok(())
        } else {
            Err(Error::MalformedProgram(format!("{self:?}")))
        }
    }

    /// Parses the identifier produced by `Display`, e.g. `L1R5T1B6W2:chicken/pebble:x:z%2`.
    pub fn parse(id: &str) -> Result<Self> {
        let bad = || Error::MalformedProgram(format!("bad animals program id {id:?}"));
        let mut parts = id.split(':');
        let (geometry, objects, a1, a2) = (
            parts.next().ok_or_else(bad)?,
            parts.next().ok_or_else(bad)?,
            parts.next().ok_or_else(bad)?,
            parts.next().ok_or_else(bad)?,
        );
        if parts.next().is_some() {
            return Err(bad());
        }
        let g = geometry.as_bytes();
        if g.len() != 10 || &g[0..1] != b"L" || &g[2..3] != b"R" || &g[4..5] != b"T" || &g[6..7] != b"B" || &g[8..9] != b"W" {
            return Err(bad());
        }
        let digit = |c: u8| c.checked_sub(b'0').filter(|d| *d <= 9).ok_or_else(bad);
        let (o, i) = objects.split_once('/').ok_or_else(bad)?;
        let program = Self {
            left: digit(g[1])?,
            right: digit(g[3])?,
            top: digit(g[5])?,
            bottom: digit(g[7])?,
            thickness: digit(g[9])?,
            outside: OUTSIDE.iter().position(|x| *x == o).ok_or_else(bad)? as u8,
            inside: INSIDE.iter().position(|x| *x == i).ok_or_else(bad)? as u8,
            a1: A1_NAMES.iter().position(|x| *x == a1).ok_or_else(bad)? as u8,
            a2: A2_NAMES.iter().position(|x| *x == a2).ok_or_else(bad)? as u8,
        };
        program.validate()?;
        Ok(program)
    }

    fn colour(&self, x: usize, y: usize) -> u8 {
        let z = match self.a1 {
            0 => x,
            1 => y,
            _ => x + y,
        };
        let c = match self.a2 {
            0 => 0,
            1 => 1,
            2 => 2,
            3 => z % 2,
            4 => z % 2 + 1,
            _ => 2 * (z % 2),
        };
        (c % 3) as u8
    }

    pub fn render(&self) -> Grid {
        let mut cells = [Cell::PEBBLE; CELLS];
        let (l, r, t, b) = (
            self.left as usize,
            self.right as usize,
            self.top as usize,
            self.bottom as usize,
        );
        for y in t..=b {
            for x in l..=r {
                let depth = (x - l).min(r - x).min(y - t).min(b - y);
                let object = if depth < self.thickness as usize {
                    self.outside
                } else {
                    self.inside
                };
                if object < 2 {
                    cells[y * SIZE + x] = Cell(1 + 3 * object + self.colour(x, y));
                }
            }
        }
        Grid { cells }
    }

    /// One-hot production choices: 12 rules × 7 slots, single-expansion rules
    /// fixed at slot 0.
    pub fn encode(&self) -> Vec<f64> {
        let mut v = alloc::vec![0.0; ENCODING_DIM];
        for (rule, choice) in self.productions().iter().enumerate() {
            v[rule * 7 + *choice as usize] = 1.0;
        }
        v
    }
}

impl fmt::Display for AnimalsProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "L{}R{}T{}B{}W{}:{}/{}:{}:{}",
            self.left,
            self.right,
            self.top,
            self.bottom,
            self.thickness,
            OUTSIDE[self.outside as usize],
            INSIDE[self.inside as usize],
            A1_NAMES[self.a1 as usize],
            A2_NAMES[self.a2 as usize]
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Grid {
    cells: [Cell; CELLS],
}

impl Grid {
    pub fn get(&self, x: usize, y: usize) -> Cell {
        self.cells[y * SIZE + x]
    }

    pub fn cells(&self) -> &[Cell; CELLS] {
        &self.cells
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cells = [Cell::PEBBLE; CELLS];
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != CELLS {
            return Err(Error::MalformedProgram(format!("grid needs {CELLS} cells, found {}", tokens.len())));
        }
        for (cell, tok) in cells.iter_mut().zip(tokens) {
            *cell = Cell::from_token(tok).ok_or_else(|| Error::MalformedProgram(format!("bad cell {tok:?}")))?;
        }
        Ok(Self { cells })
    }
}

/// Seven lines of seven space-separated cell tokens.
impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for y in 0..SIZE {
            for x in 0..SIZE {
                if x > 0 {
                    f.write_str(" ")?;
                }
                f.write_str(self.get(x, y).token())?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

/// Revealing the content of one square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Reveal {
    pub x: u8,
    pub y: u8,
    pub cell: Cell,
}

impl Reveal {
    /// Index in [`reveal_utterances`] order.
    pub fn index(&self) -> usize {
        (self.x as usize * SIZE + self.y as usize) * CELL_VALUES + self.cell.0 as usize
    }

    pub fn is_consistent(&self, program: &AnimalsProgram) -> bool {
        program.render().get(self.x as usize, self.y as usize) == self.cell
    }

    pub fn parse(id: &str) -> Result<Self> {
        let bad = || Error::MalformedProgram(format!("bad reveal {id:?}"));
        let mut parts = id.split(':');
        let x: u8 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let y: u8 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let cell = parts.next().and_then(Cell::from_token).ok_or_else(bad)?;
        if parts.next().is_some() || x as usize >= SIZE || y as usize >= SIZE {
            return Err(bad());
        }
        Ok(Self { x, y, cell })
    }
}

impl fmt::Display for Reveal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.x, self.y, self.cell.token())
    }
}

/// All 7 × 7 × 7 reveals, ordered by x, then y, then cell value.
pub fn reveal_utterances() -> Vec<Reveal> {
    let mut out = Vec::with_capacity(CELLS * CELL_VALUES);
    for x in 0..SIZE as u8 {
        for y in 0..SIZE as u8 {
            for v in 0..CELL_VALUES as u8 {
                out.push(Reveal { x, y, cell: Cell(v) });
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct AnimalsEnumeration {
    /// One representative per distinct pattern: the smallest production
    /// sequence drawing it. Ordered by that sequence.
    pub programs: Vec<AnimalsProgram>,
    pub patterns: Vec<Grid>,
    pub syntactic_count: usize,
}

/// Every well-formed program, grouped by the pattern it draws.
pub fn enumerate_animals() -> AnimalsEnumeration {
    let mut seen: BTreeMap<Grid, AnimalsProgram> = BTreeMap::new();
    let mut syntactic = 0;
    let s = SIZE as u8;
    for left in 0..s {
        for right in left..s {
            for top in 0..s {
                for bottom in top..s {
                    for thickness in 1..=3 {
                        for outside in 0..2 {
                            for inside in 0..3 {
                                for a1 in 0..3 {
                                    for a2 in 0..6 {
                                        let p = AnimalsProgram {
                                            left,
                                            right,
                                            top,
                                            bottom,
                                            thickness,
                                            outside,
                                            inside,
                                            a1,
                                            a2,
                                        };
                                        syntactic += 1;
                                        seen.entry(p.render()).or_insert(p);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    // loop order matches production order, so the first program per pattern is the smallest
    let mut pairs: Vec<(AnimalsProgram, Grid)> = seen.into_iter().map(|(g, p)| (p, g)).collect();
    pairs.sort_by_key(|(p, _)| p.productions());
    let (programs, patterns) = pairs.into_iter().unzip();
    AnimalsEnumeration {
        programs,
        patterns,
        syntactic_count: syntactic,
    }
}

/// The 343 reveals as rows, one column per pattern.
pub fn animals_lexicon(programs: &[AnimalsProgram], patterns: &[Grid]) -> Result<Lexicon> {
    if programs.len() != patterns.len() {
        return Err(Error::DimensionMismatch {
            expected: programs.len(),
            found: patterns.len(),
        });
    }
    let utterances = reveal_utterances();
    let mut rows = alloc::vec![BitSet::new(programs.len()); utterances.len()];
    for (w, grid) in patterns.iter().enumerate() {
        for x in 0..SIZE {
            for y in 0..SIZE {
                let cell = grid.get(x, y);
                rows[Reveal { x: x as u8, y: y as u8, cell }.index()].insert(w);
            }
        }
    }
    Lexicon::from_rows(
        utterances.iter().map(|r| format!("{r}")).collect(),
        programs.iter().map(|p| format!("{p}")).collect::<Vec<String>>(),
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn figure_ring() -> AnimalsProgram {
        AnimalsProgram::from_productions([0, 0, 1, 5, 1, 6, 1, 0, 2, 0, 0, 3]).unwrap()
    }

    #[test]
    fn figure_program_draws_thick_ring() {
        let p = figure_ring();
        assert_eq!(p.to_string(), "L1R5T1B6W2:chicken/pebble:x:z%2");
        let g = p.render();
        // outside the box
        assert_eq!(g.get(0, 3), Cell::PEBBLE);
        assert_eq!(g.get(3, 0), Cell::PEBBLE);
        // border, coloured by x parity: even x red, odd x green
        assert_eq!(g.get(1, 1).token(), "Cg");
        assert_eq!(g.get(2, 1).token(), "Cr");
        assert_eq!(g.get(2, 2).token(), "Cr");
        // depth 2 from every side: interior pebble
        assert_eq!(g.get(3, 3), Cell::PEBBLE);
        assert_eq!(g.get(3, 4), Cell::PEBBLE);
        let other = AnimalsProgram::from_productions([0, 0, 0, 5, 1, 6, 1, 1, 2, 0, 1, 3]).unwrap();
        assert_ne!(other.render(), g);
    }

    #[test]
    fn constant_colour_and_thick_boxes() {
        let mut p = figure_ring();
        p.a2 = 0;
        p.inside = 1;
        let g = p.render();
        assert!(g.cells().iter().all(|c| *c == Cell::PEBBLE || c.token().ends_with('r')));
        // a 3-wide box with thickness 2 has no interior, so the inside object never shows
        let a = AnimalsProgram { left: 2, right: 4, top: 2, bottom: 4, thickness: 2, outside: 0, inside: 1, a1: 0, a2: 0 };
        let b = AnimalsProgram { inside: 2, ..a };
        assert_eq!(a.render(), b.render());
    }

    #[test]
    fn ids_and_grids_round_trip() {
        let p = figure_ring();
        assert_eq!(AnimalsProgram::parse(&p.to_string()).unwrap(), p);
        let id = p.to_string();
        assert!(!id.contains(',') && !id.contains('\t') && !id.contains(';'));
        let g = p.render();
        assert_eq!(Grid::parse(&g.to_string()).unwrap(), g);
        assert!(AnimalsProgram::parse("L5R1T1B6W2:chicken/pebble:x:z%2").is_err());
        assert!(AnimalsProgram::parse("L1R5T1B6W2:cow/pebble:x:z%2").is_err());
        assert!(AnimalsProgram::from_productions([1, 0, 1, 5, 1, 6, 1, 0, 2, 0, 0, 3]).is_err());
        let r = Reveal { x: 3, y: 6, cell: Cell(5) };
        assert_eq!(Reveal::parse(&r.to_string()).unwrap(), r);
        assert_eq!(reveal_utterances()[r.index()], r);
    }

    #[test]
    fn encoding_is_one_hot() {
        let a = figure_ring();
        let mut b = a;
        b.a1 = 1;
        let (ea, eb) = (a.encode(), b.encode());
        assert_eq!(ea.len(), 84);
        assert_eq!(ea.iter().sum::<f64>(), 12.0);
        // rule r with choice c sits at 7r + c
        for idx in [0, 7, 15, 26, 29, 41, 43, 49, 58, 63, 70, 80] {
            assert_eq!(ea[idx], 1.0, "offset {idx}");
        }
        assert_eq!(ea.iter().zip(&eb).filter(|(x, y)| x != y).count(), 2);
    }

    #[test]
    fn reveals_match_renders() {
        let p = figure_ring();
        let g = p.render();
        for r in reveal_utterances() {
            assert_eq!(r.is_consistent(&p), g.get(r.x as usize, r.y as usize) == r.cell);
        }
        assert_eq!(reveal_utterances().len(), 343);
    }
}
