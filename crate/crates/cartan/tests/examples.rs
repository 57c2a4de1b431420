//! Each cargo example is compiled into this test binary and run once.

mod verify_identities {
    include!("../examples/verify_identities.rs");

    #[test]
    fn builtin_models_pass_and_scaled_curvature_fails() {
        let rows = run_example().unwrap();
        let (last, rest) = rows.split_last().unwrap();
        assert!(rest.iter().all(|r| r.1), "{rest:?}");
        assert!(!last.1 && last.2 > 1e-3, "{last:?}");
    }
}

mod leaf_foliation {
    include!("../examples/leaf_foliation.rs");

    #[test]
    fn leaf_dimensions_and_drift() {
        let s = run_example().unwrap();
        assert_eq!(s.generic_leaf_dim, 2);
        assert_eq!(s.fixed_point_leaf_dim, 0);
        assert_eq!(s.fixed_point_isotropy_dim, 3);
        assert!(s.max_drift < 1e-8, "{}", s.max_drift);
    }
}

mod monodromy_periods {
    include!("../examples/monodromy_periods.rs");

    #[test]
    fn periods_match_closed_forms() {
        let r = run_example().unwrap();
        assert_eq!(r.generators.len(), 2);
        for g in &r.generators {
            let cf = g.closed_form.unwrap();
            assert!(
                (g.period.coefficients[0] - cf).abs() < 1e-8 * cf.abs(),
                "{}",
                g.label
            );
        }
        assert!(r.discrete.is_yes() && r.monodromy_discrete.is_yes());
    }
}

mod complete_solutions {
    include!("../examples/complete_solutions.rs");

    #[test]
    fn known_level_sets() {
        let rows = run_example().unwrap();
        let labels: Vec<String> = rows.iter().filter_map(|r| r.4.clone()).collect();
        for want in ["ℝ²", "ℂℙ¹_{1,2}", "𝕊²", "ℍ²"] {
            assert!(
                labels.iter().any(|l| l == want),
                "{want} missing from {labels:?}"
            );
        }
    }
}

mod cubic_profile {
    include!("../examples/cubic_profile.rs");

    #[test]
    fn root_patterns() {
        let rows = run_example();
        let signs: Vec<i8> = rows.iter().map(|r| r.2).collect();
        assert_eq!(signs, vec![1, 0, -1, -1, 0]);
        assert_eq!(rows[0].3.len(), 3);
        assert_eq!(rows[1].3.iter().map(|r| r.1).max(), Some(2));
        assert_eq!(rows[4].3, vec![(0.0, 3)]);
    }
}

mod solution_table {
    include!("../examples/solution_table.rs");

    #[test]
    fn representatives_yield_their_rows() {
        let (text, labels) = run_example();
        assert!(text.contains("ℂℙ¹_{p,q}"));
        assert_eq!(labels.len(), 8);
        assert!(labels[0].contains(&"ℝ²".to_string()));
        assert!(labels[6].is_empty());
        assert!(labels[7].contains(&"ℂℙ¹_{1,2}".to_string()));
    }
}

mod su21_picture {
    include!("../examples/su21_picture.rs");

    #[test]
    fn dictionary_transport_and_kernels() {
        let s = run_example().unwrap();
        assert!(s.dictionary < 1e-12, "{}", s.dictionary);
        assert!(s.transport < 1e-9, "{}", s.transport);
        assert_eq!(s.kernels[0].is_closed, Some(true));
        assert!(s.kernels.iter().all(|k| k.sign_agrees));
    }
}

mod parameter_sweep {
    include!("../examples/parameter_sweep.rs");

    #[test]
    fn sweep_finds_flat_plane() {
        let labels = run_example();
        assert!(labels.iter().any(|l| l == "ℝ²"), "{labels:?}");
    }
}

mod rationality {
    include!("../examples/rationality.rs");

    #[test]
    fn verdicts() {
        let v = run_example();
        assert!(matches!(v[0].1, Rationality::Rational { p: 1, q: 2, .. }));
        assert!(matches!(v[2].1, Rationality::Rational { p: 3, q: 5, .. }));
        assert!(matches!(
            v[3].1,
            Rationality::Rational { p: 355, q: 113, .. }
        ));
        assert!(matches!(v[4].1, Rationality::IrrationalUpTo { .. }));
    }
}

mod numerics {
    include!("../examples/numerics.rs");

    #[test]
    fn known_answers() {
        let errs = run_example().unwrap();
        assert!(errs.iter().all(|e| e.abs() < 1e-8), "{errs:?}");
    }
}

mod cli_report {
    include!("../examples/cli_report.rs");

    #[test]
    fn classify_report_round_trips() {
        let (code, report) = run_example();
        assert_eq!(code, 0);
        assert_eq!(report["command"], "ek classify");
        assert_eq!(report["provenance"]["seed"], 3);
    }
}
