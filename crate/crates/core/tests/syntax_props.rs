mod common;

use lvw_core::feature_model::VariantSelection;
use lvw_core::syntax::{detect_notation, parse, unparse, Notation};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn arrow_round_trip(m in common::arb_statechart()) {
        let text = unparse(&m, Notation::Arrow);
        let back = parse(&text, &VariantSelection::permissive());
        prop_assert!(back.is_ok(), "{}\n{:?}", text.source, back);
        prop_assert_eq!(back.unwrap(), m);
    }

    #[test]
    fn keyword_round_trip(m in common::arb_statechart()) {
        let text = unparse(&m, Notation::Keyword);
        prop_assert_eq!(detect_notation(&text.source), Notation::Keyword);
        let back = parse(&text, &VariantSelection::permissive());
        prop_assert!(back.is_ok(), "{}\n{:?}", text.source, back);
        prop_assert_eq!(back.unwrap(), m);
    }

    #[test]
    fn notations_agree(m in common::arb_statechart()) {
        let sel = VariantSelection::permissive();
        let a = parse(&unparse(&m, Notation::Arrow), &sel).unwrap();
        let k = parse(&unparse(&m, Notation::Keyword), &sel).unwrap();
        prop_assert_eq!(a, k);
    }

    #[test]
    fn keyword_text_needs_the_keyword_option(m in common::arb_statechart()) {
        let mut sel = VariantSelection::permissive();
        sel.presentation.clear();
        prop_assert!(parse(&unparse(&m, Notation::Arrow), &sel).is_ok());
        prop_assert!(parse(&unparse(&m, Notation::Keyword), &sel).is_err());
    }

    #[test]
    fn abbreviations_need_their_features(m in common::arb_statechart()) {
        let mut sel = VariantSelection::permissive();
        sel.abbreviations.clear();
        let accepted = parse(&unparse(&m, Notation::Arrow), &sel).is_ok();
        prop_assert_eq!(accepted, !m.is_hierarchical() && !m.has_multitrigger());
    }

    #[test]
    fn unparse_is_a_fixpoint(m in common::arb_statechart()) {
        let sel = VariantSelection::permissive();
        for n in [Notation::Arrow, Notation::Keyword] {
            let text = unparse(&m, n);
            let again = unparse(&parse(&text, &sel).unwrap(), n);
            prop_assert_eq!(text.source, again.source);
        }
    }
}
