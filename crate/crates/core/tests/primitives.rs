mod common;

use std::collections::BTreeSet;

use pstab::primitives::*;
use pstab::words::{build_ball, Presentation, Word};

fn n3_classes(max_len: usize, depth: usize) -> Vec<PrimitiveClass> {
    let p = Presentation::nonorientable(3);
    let ball = build_ball(&p, 16).unwrap();
    let r = ReferenceStructure::for_presentation(&p, depth).unwrap();
    enumerate_primitives(&ball, Some(&r), max_len).unwrap()
}

#[test]
fn f2_matches_whitehead_orbit() {
    let ours: BTreeSet<Word> = f2_primitives(10).iter().map(|c| common::free_class(&c.word)).collect();
    assert_eq!(ours, common::whitehead_primitives(10));
}

#[test]
fn christoffel_words() {
    let p = Presentation::free(2);
    let (a, b) = (p.parse_word("a").unwrap().letters()[0], p.parse_word("b").unwrap().letters()[0]);
    assert_eq!(p.format_word(&christoffel_word(1, 1, a, b)), "ab");
    assert_eq!(p.format_word(&christoffel_word(1, 2, a, b)), "aab");
    assert_eq!(p.format_word(&christoffel_word(2, 3, a, b)), "aabab");
    assert!(is_primitive_f2(&p.parse_word("abaab").unwrap()));
    assert!(!is_primitive_f2(&p.parse_word("abAB").unwrap()));
    assert!(!is_primitive_f2(&p.parse_word("aabb").unwrap()));
}

#[test]
fn short_nonorientable_classes() {
    let p = Presentation::nonorientable(3);
    let got: BTreeSet<String> = n3_classes(4, 3).iter().map(|c| p.format_word(&c.word)).collect();
    let expected = ["a", "b", "c", "ab", "ac", "bc", "aab", "aac", "abb", "abc", "abAC", "abCB", "aCBc"];
    assert_eq!(got, expected.iter().map(|s| s.to_string()).collect());
    let counts: Vec<usize> = [4, 6].iter().map(|&n| n3_classes(n, 3).len()).collect();
    assert_eq!(counts, [13, 25]);
}

#[test]
fn conjugator_depth_does_not_change_short_classes() {
    let words = |d| n3_classes(6, d).into_iter().map(|c| c.word).collect::<Vec<_>>();
    assert_eq!(words(3), words(5));
}

#[test]
fn simplicity_is_a_class_property() {
    let p = Presentation::nonorientable(3);
    let r = ReferenceStructure::for_presentation(&p, 3).unwrap();
    let mut rng = common::rng(11);
    for c in n3_classes(5, 3) {
        assert!(is_simple(&p, &c.word.inverse(), Some(&r)).unwrap());
        for _ in 0..10 {
            let u = common::random_word(&mut rng, 3, 4);
            let v = u.mul(&c.word).mul(&u.inverse());
            assert!(is_simple(&p, &v, Some(&r)).unwrap(), "{}", p.format_word(&v));
        }
    }
}

#[test]
fn non_simple_words() {
    let p = Presentation::nonorientable(3);
    let r = ReferenceStructure::for_presentation(&p, 3).unwrap();
    for s in ["aa", "abab", "aabb", "bbcc"] {
        assert!(!is_simple(&p, &p.parse_word(s).unwrap(), Some(&r)).unwrap(), "{s}");
    }
    assert!(is_simple(&p, &Word::identity(), Some(&r)).is_err());
    assert!(is_simple(&p, &p.parse_word("a").unwrap(), None).is_err());
}

#[test]
fn orientation_of_classes() {
    for c in n3_classes(6, 3) {
        assert_eq!(c.orientation, if c.word.len() % 2 == 1 { -1 } else { 1 });
        assert_eq!(c.verified_depth, Some(3));
    }
}
