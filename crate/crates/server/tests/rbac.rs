mod support;

use axum::http::StatusCode;
use provkg_core::governance::{allows, ActionKind, Role};
use support::matrix;

#[test]
fn hand_written_matrix_matches_the_library() {
    for role in Role::ALL {
        for action in ActionKind::ALL {
            assert_eq!(matrix::expected(role, action), allows(role, action), "{role} {action}");
        }
    }
}

#[tokio::test]
async fn every_role_against_every_endpoint() {
    let mut failures = Vec::new();
    for role in Role::ALL {
        for o in matrix::run_role(role).await {
            if !o.conforms() {
                failures.push(format!("{} {} {} -> {} {:?}", o.role, o.method, o.path, o.status, o.code));
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[tokio::test]
async fn probes_cover_every_action() {
    let covered: std::collections::BTreeSet<_> = matrix::probes(1, 2, 3, 1).iter().map(|p| p.action).collect();
    assert_eq!(covered.len(), ActionKind::ALL.len());
}

#[tokio::test]
async fn no_token_means_401() {
    for (path, status) in matrix::unauthenticated_statuses().await {
        assert_eq!(status, StatusCode::UNAUTHORIZED, "{path}");
    }
}
