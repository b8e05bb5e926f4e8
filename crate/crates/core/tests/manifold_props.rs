use nalgebra::Matrix3;
use proptest::prelude::*;
use quadcable::manifold::{
    attitude_psi, hat, hat_mat, project_so3, rotate_unit, rotation_error, so3_exp, sphere_errors, sphere_psi, vee,
};
use quadcable::{RotationMatrix, UnitVector, Vec3};

fn vec3(scale: f64) -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-scale..scale).prop_map(|a| Vec3::new(a[0], a[1], a[2]))
}

fn unit() -> impl Strategy<Value = UnitVector> {
    vec3(1.0).prop_filter("non-degenerate", |v| v.norm() > 1e-3).prop_map(|v| UnitVector::new(v.normalize()).unwrap())
}

fn rotation() -> impl Strategy<Value = RotationMatrix> {
    vec3(3.0).prop_map(|v| so3_exp(&v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hat_is_cross_product(v in vec3(10.0), w in vec3(10.0)) {
        prop_assert!((hat(&v).matrix() * w - v.cross(&w)).norm() < 1e-12);
        prop_assert!((vee(&hat_mat(&v)).unwrap() - v).norm() == 0.0);
    }

    #[test]
    fn exponential_lands_on_so3(v in vec3(10.0)) {
        let r = so3_exp(&v);
        prop_assert!(r.orthogonality_error() < 1e-13);
        prop_assert!((r.matrix().determinant() - 1.0).abs() < 1e-13);
        let back = r.compose(&so3_exp(&-v));
        prop_assert!((back.matrix() - Matrix3::identity()).abs().max() < 1e-13);
    }

    #[test]
    fn projection_fixes_rotations(r in rotation(), noise in vec3(1e-4)) {
        let p = project_so3(r.matrix()).unwrap();
        prop_assert!((p.matrix() - r.matrix()).abs().max() < 1e-13);
        let perturbed = r.matrix() + Matrix3::from_diagonal(&noise);
        let p = project_so3(&perturbed).unwrap();
        prop_assert!(p.orthogonality_error() < 1e-13);
        prop_assert!((p.matrix() - r.matrix()).abs().max() < 1e-3);
    }

    #[test]
    fn attitude_error_identity(r in rotation(), rd in rotation()) {
        let psi = attitude_psi(&r, &rd);
        let e = rotation_error(&r, &rd);
        prop_assert!((-1e-14..=2.0 + 1e-14).contains(&psi));
        prop_assert!((e.norm_squared() - psi * (2.0 - psi)).abs() < 1e-12);
        prop_assert!(rotation_error(&r, &r).norm() < 1e-14);
        // Error is antisymmetric in its arguments.
        let back = rotation_error(&rd, &r);
        prop_assert!((r.matrix() * e + rd.matrix() * back).norm() < 1e-12);
    }

    #[test]
    fn sphere_error_identity(q in unit(), qd in unit(), w in vec3(5.0), wd in vec3(5.0)) {
        let psi = sphere_psi(&q, &qd);
        let w = w - q.as_vec() * q.as_vec().dot(&w);
        let (e_q, e_w) = sphere_errors(&q, &w, &qd, &wd);
        prop_assert!((-1e-14..=2.0 + 1e-14).contains(&psi));
        prop_assert!((e_q.norm_squared() - psi * (2.0 - psi)).abs() < 1e-12);
        prop_assert!(e_q.dot(q.as_vec()).abs() < 1e-12);
        prop_assert!(e_w.dot(q.as_vec()).abs() < 1e-10);
    }

    #[test]
    fn rotating_a_unit_vector_keeps_it_unit(q in unit(), xi in vec3(10.0)) {
        let r = rotate_unit(&q, &xi);
        prop_assert!(r.norm_error() < 1e-13);
    }
}

#[test]
fn constructors_reject_off_manifold_input() {
    assert!(UnitVector::new(Vec3::new(1.0, 1.0, 0.0)).is_err());
    assert!(RotationMatrix::new(Matrix3::identity() * 1.01).is_err());
    assert!(RotationMatrix::new(-Matrix3::identity()).is_err());
    assert!(UnitVector::normalize(Vec3::new(1e-12, 0.0, 0.0), 1e-9).is_err());
}
