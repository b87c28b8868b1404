#include <doctest.h>

#include <fstream>
#include <random>

#include "finepose/error.hpp"
#include "finepose/image_io.hpp"
#include "finepose/segmentation.hpp"
#include "support.hpp"

using namespace finepose;

namespace {

BinaryMask rect(int w, int h, int x0, int y0, int rw, int rh) {
    BinaryMask m(w, h);
    for (int y = y0; y < y0 + rh; ++y)
        for (int x = x0; x < x0 + rw; ++x) m.set(x, y);
    return m;
}

BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double p) {
    std::bernoulli_distribution on(p);
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, on(rng));
    return m;
}

}  // namespace

TEST_CASE("iou examples") {
    const BinaryMask a = rect(30, 20, 0, 0, 10, 10);
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, rect(30, 20, 15, 5, 10, 10)) == 0.0);
    CHECK(iou(a, rect(30, 20, 5, 0, 10, 10)) == 1.0 / 3.0);
    CHECK(iou(BinaryMask(4, 4), BinaryMask(4, 4)) == 0.0);
    CHECK_THROWS_AS(iou(BinaryMask(4, 4), BinaryMask(4, 5)), DimensionMismatchError);
}

TEST_CASE("iou properties on random masks") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const BinaryMask a = random_mask(rng, 9, 7, 0.4);
        BinaryMask b = random_mask(rng, 9, 7, 0.4);
        const double ab = iou(a, b);
        CHECK(ab == iou(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        if (mask_area(a) > 0) {
            CHECK(iou(a, a) == 1.0);
            CHECK((ab == 1.0) == (a == b));
        }
    }
}

TEST_CASE("select_reference rules") {
    const BinaryMask render = rect(40, 30, 5, 5, 10, 10);

    SUBCASE("single instance") {
        ReferenceSet refs;
        refs.instance_masks.push_back({rect(40, 30, 20, 20, 5, 5), 0.9});
        CHECK(select_reference(refs, render) == refs.instance_masks[0].mask);
    }
    SUBCASE("overlapping instance wins over a disjoint one") {
        ReferenceSet refs;
        refs.instance_masks.push_back({rect(40, 30, 25, 15, 10, 10), 0.99});
        refs.instance_masks.push_back({rect(40, 30, 6, 6, 10, 10), 0.5});
        CHECK(select_reference(refs, render) == refs.instance_masks[1].mask);
    }
    SUBCASE("weak instances fall back to the semantic mask") {
        // overlaps of 20/180 and 10/190 with the 10x10 render, both below 0.25
        ReferenceSet refs;
        refs.instance_masks.push_back({rect(40, 30, 13, 5, 10, 10), 0.9});
        refs.instance_masks.push_back({rect(40, 30, 14, 5, 10, 10), 0.9});
        refs.semantic_mask = rect(40, 30, 0, 0, 40, 30);
        CHECK(iou(refs.instance_masks[0].mask, render) == 20.0 / 180.0);
        CHECK(iou(refs.instance_masks[1].mask, render) == 10.0 / 190.0);
        CHECK(select_reference(refs, render) == *refs.semantic_mask);
        refs.semantic_mask.reset();
        CHECK(select_reference(refs, render) == refs.instance_masks[0].mask);
    }
    SUBCASE("ties go to the larger mask, then the first") {
        ReferenceSet refs;
        // both have IoU 0.5 with the 10x10 render: 50/100 and 100/200
        refs.instance_masks.push_back({rect(40, 30, 5, 5, 5, 10), 1.0});
        refs.instance_masks.push_back({rect(40, 30, 5, 5, 20, 10), 1.0});
        CHECK(select_reference(refs, render) == refs.instance_masks[1].mask);
        std::swap(refs.instance_masks[0], refs.instance_masks[1]);
        CHECK(select_reference(refs, render) == refs.instance_masks[0].mask);
    }
    SUBCASE("empty candidates") {
        ReferenceSet refs;
        CHECK_THROWS_AS(select_reference(refs, render), NoReferenceError);
        refs.instance_masks.push_back({BinaryMask(40, 30), 0.3});
        refs.semantic_mask = BinaryMask(40, 30);
        CHECK_THROWS_AS(select_reference(refs, render), NoReferenceError);
    }
    SUBCASE("mismatched sizes") {
        ReferenceSet refs;
        refs.instance_masks.push_back({rect(40, 30, 0, 0, 3, 3), 0.3});
        refs.instance_masks.push_back({rect(41, 30, 0, 0, 3, 3), 0.3});
        CHECK_THROWS_AS(select_reference(refs, render), DimensionMismatchError);
    }
}

TEST_CASE("select_reference ignores instance order") {
    std::mt19937_64 rng(17);
    const BinaryMask render = rect(12, 12, 2, 2, 6, 6);
    for (int trial = 0; trial < 50; ++trial) {
        ReferenceSet refs;
        for (int k = 0; k < 4; ++k) refs.instance_masks.push_back({random_mask(rng, 12, 12, 0.3), 0.5});
        const BinaryMask chosen = select_reference(refs, render);
        std::shuffle(refs.instance_masks.begin(), refs.instance_masks.end(), rng);
        CHECK(select_reference(refs, render) == chosen);
    }
}

TEST_CASE("reference sidecar loads semantic and instance masks") {
    testing::TempDir dir("refs");
    write_mask_png(dir / "sem.png", rect(20, 10, 0, 0, 20, 10));
    write_mask_png(dir / "a.png", rect(20, 10, 2, 2, 3, 3));
    write_mask_png(dir / "b.png", rect(20, 10, 10, 2, 3, 3));
    {
        std::ofstream out(dir / "instances.json");
        out << R"({"semantic": "sem.png", "instances": [{"file": "a.png", "confidence": 0.8},
                  {"file": "b.png", "confidence": 0.6}]})";
    }
    const ReferenceSet refs = load_reference_set(dir / "instances.json");
    REQUIRE(refs.semantic_mask);
    CHECK(mask_area(*refs.semantic_mask) == 200);
    REQUIRE(refs.instance_masks.size() == 2);
    CHECK(refs.instance_masks[1].confidence == 0.6);
    CHECK(refs.instance_masks[1].mask == rect(20, 10, 10, 2, 3, 3));

    {
        std::ofstream out(dir / "bad.json");
        out << R"({"instances": [{"file": "a.png", "confidence": 1.5}]})";
    }
    CHECK_THROWS_AS(load_reference_set(dir / "bad.json"), InvalidParameterError);
    CHECK_THROWS_AS(load_reference_set(dir / "missing.json"), IoError);
}
