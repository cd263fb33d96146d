use proptest::prelude::*;

use crop_ensemble::boxcrop::{
    effective_delta, expand_margin, extract_and_squeeze, make_box_triple, normalize_with_boxes, FaceBox, Frame,
    CROP_SIZE, DEFAULT_DELTA, REFERENCE_SIZE,
};

fn bounds(b: &FaceBox) -> (i32, i32, i32, i32) {
    let (xa, ya, xb, yb) = b.coords();
    (xa.min(xb), ya.min(yb), xa.max(xb), ya.max(yb))
}

fn canonical_box() -> impl Strategy<Value = FaceBox> {
    (0i32..812, 0i32..812).prop_flat_map(|(x0, y0)| {
        (Just(x0), Just(y0), x0 + 4..=815, y0 + 4..=815)
            .prop_map(|(x0, y0, x1, y1)| FaceBox::from_coords(x0, y0, x1, y1))
    })
}

proptest! {
    #[test]
    fn middle_is_intersection_of_left_and_right(face in canonical_box(), nominal in 1u32..200) {
        let t = make_box_triple(&face, nominal).unwrap();
        let (l, r) = (bounds(&t.left_box), bounds(&t.right_box));
        let oracle = (l.0.max(r.0), l.1.max(r.1), l.2.min(r.2), l.3.min(r.3));
        prop_assert_eq!(bounds(&t.middle), oracle);
    }

    #[test]
    fn dimension_identities(face in canonical_box(), nominal in 1u32..200) {
        let t = make_box_triple(&face, nominal).unwrap();
        let (w, h, d) = (face.width(), face.height(), t.delta);
        prop_assert!(d <= nominal);
        prop_assert_eq!((t.left_box.width(), t.left_box.height()), (w - d, h - d));
        prop_assert_eq!((t.right_box.width(), t.right_box.height()), (w - d, h - d));
        prop_assert_eq!((t.middle.width(), t.middle.height()), (w - 2 * d, h - 2 * d));
    }

    #[test]
    fn delta_is_nominal_when_the_middle_stays_wide(w in 1u32..2000, h in 1u32..2000, nominal in 0u32..300) {
        let d = effective_delta(w, h, nominal);
        if w.min(h) > 2 * nominal {
            prop_assert_eq!(d, nominal);
        } else {
            prop_assert_eq!(d, nominal.min(w.min(h) / 4));
        }
    }

    #[test]
    fn expansion_stays_in_frame_and_contains_the_detection(face in canonical_box()) {
        let frame = Frame::filled(REFERENCE_SIZE, REFERENCE_SIZE, [0, 0, 0]).unwrap();
        let grown = expand_margin(&face, &frame);
        let (g, f) = (bounds(&grown), bounds(&face));
        prop_assert!(g.0 >= 0 && g.1 >= 0 && g.2 < 816 && g.3 < 816);
        prop_assert!(g.0 <= f.0 && g.1 <= f.1 && g.2 >= f.2 && g.3 == f.3);
    }

    #[test]
    fn every_crop_is_squeezed_to_model_size(face in canonical_box()) {
        let frame = Frame::filled(REFERENCE_SIZE, REFERENCE_SIZE, [9, 8, 7]).unwrap();
        let t = make_box_triple(&face, DEFAULT_DELTA).unwrap();
        prop_assume!(t.middle.width() > 0 && t.middle.height() > 0);
        let crops = extract_and_squeeze(&frame, &t).unwrap();
        for img in &crops.images {
            prop_assert_eq!(img.dimensions(), (CROP_SIZE, CROP_SIZE));
            prop_assert!(img.pixels().all(|p| p.0 == [9, 8, 7]));
        }
    }

    #[test]
    fn reference_scaling_keeps_boxes_inside(w in 16u32..1200, h in 16u32..1200, fx in 0.0f64..1.0, fy in 0.0f64..1.0) {
        let frame = Frame::filled(w, h, [1, 2, 3]).unwrap();
        let x = (fx * f64::from(w - 1)) as i32;
        let y = (fy * f64::from(h - 1)) as i32;
        let (reference, boxes) = normalize_with_boxes(&frame, &[FaceBox::from_coords(0, 0, x, y)]);
        prop_assert_eq!((reference.width(), reference.height()), (REFERENCE_SIZE, REFERENCE_SIZE));
        let b = bounds(&boxes[0]);
        prop_assert!(b.0 >= 0 && b.1 >= 0 && b.2 <= 815 && b.3 <= 815);
    }
}
