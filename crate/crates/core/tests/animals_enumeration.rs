use std::collections::HashSet;

use pragrank_core::domains::animals::{animals_lexicon, enumerate_animals, reveal_utterances, Cell, Reveal};

#[test]
fn full_enumeration() {
    let e = enumerate_animals();
    assert_eq!(e.syntactic_count, 254_016);
    assert_eq!(e.programs.len(), e.patterns.len());
    println!("animals: {} syntactic, {} distinct patterns", e.syntactic_count, e.programs.len());

    let patterns: HashSet<_> = e.patterns.iter().collect();
    assert_eq!(patterns.len(), e.patterns.len());
    for (p, g) in e.programs.iter().zip(&e.patterns) {
        assert_eq!(&p.render(), g);
    }
    let encodings: HashSet<Vec<u64>> = e
        .programs
        .iter()
        .map(|p| p.encode().iter().map(|x| x.to_bits()).collect())
        .collect();
    assert_eq!(encodings.len(), e.programs.len());

    let lex = animals_lexicon(&e.programs, &e.patterns).unwrap();
    assert_eq!(lex.m(), 343);
    assert_eq!(lex.n(), e.programs.len());
    assert!((0..lex.n()).all(|w| lex.column(w).len() == 49));

    // the corner is always border when inside the box, so a pebble there means the box avoids it
    let corner = Reveal { x: 0, y: 0, cell: Cell::PEBBLE };
    let expected: Vec<usize> = (0..lex.n())
        .filter(|&w| {
            let p = &e.programs[w];
            p.left > 0 || p.top > 0
        })
        .collect();
    assert_eq!(lex.row(corner.index()).to_vec(), expected);
    assert_eq!(reveal_utterances()[corner.index()], corner);
}
