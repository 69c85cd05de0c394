use askframe_core::plan::{element_similarity, parse_plan, plan_similarity, Plan, PlanElement, PlanType};
use proptest::prelude::*;

fn token() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z]{1,8}",
        "[a-z']{1,6}",
        "[^\\[\\];]{1,5}".prop_filter("no whitespace", |s| !s.chars().any(char::is_whitespace)),
    ]
}

fn element() -> impl Strategy<Value = PlanElement> {
    prop_oneof![
        Just(PlanElement::respond()),
        (
            prop::sample::select(vec![PlanType::Give, PlanType::Perform, PlanType::Gain, PlanType::Lose]),
            prop::collection::vec(token(), 1..3),
            prop::collection::vec(token(), 0..5),
        )
            .prop_map(|(t, a, g)| PlanElement::new(t, a, g).unwrap()),
    ]
}

fn plan() -> impl Strategy<Value = Plan> {
    prop::collection::vec(element(), 1..5).prop_map(|e| Plan::new(e).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn round_trip(p in plan()) {
        prop_assert_eq!(parse_plan(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn whitespace_and_type_case_do_not_matter(p in plan(), pad in "[ \t\n]{1,3}") {
        let text = p.to_string();
        let spaced = text
            .replace('[', &format!("{pad}[{pad}"))
            .replace(']', &format!("{pad}]{pad}"))
            .replace(';', &format!("{pad};{pad}"))
            .replace(' ', &pad);
        let lowered_types = PlanType::ALL
            .iter()
            .fold(spaced, |s, t| s.replace(t.as_str(), &t.as_str().to_lowercase()));
        prop_assert_eq!(parse_plan(&format!("{pad}{lowered_types}{pad}")).unwrap(), p);
    }

    #[test]
    fn similarity_is_bounded_and_symmetric(a in plan(), b in plan()) {
        let ab = plan_similarity(&a, &b);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, plan_similarity(&b, &a));
        prop_assert!((plan_similarity(&a, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn element_type_mismatch_scores_zero(a in element(), b in element()) {
        let s = element_similarity(&a, &b);
        if a.ptype() != b.ptype() {
            prop_assert_eq!(s, 0.0);
        } else {
            prop_assert!(s >= 0.4);
        }
    }
}

#[test]
fn verbatim_plan_strings_parse() {
    for s in [
        "PERFORM [provides [relief]]",
        "PERFORM [see [ that ]]",
        "GIVE [give [ why got ]]",
        "PERFORM [ find [your billing date and names ]]",
        "PERFORM [look [ i ]]",
        "PERFORM [ support [them ]]",
        "GIVE [ donate [to ]]",
        "GIVE [give [ part ]]",
        "GIVE [ give [ online ]]",
    ] {
        let p = parse_plan(s).unwrap();
        assert_eq!(parse_plan(&p.to_string()).unwrap(), p);
    }
}
