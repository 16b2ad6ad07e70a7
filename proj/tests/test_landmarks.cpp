#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "support.hpp"
#include "tpsalign/landmarks.hpp"

using namespace tpsalign;
using tpsalign::fixtures::Rng;

namespace {

std::string two_group_json(double first_x = 10.0, std::size_t first_group_size = 10) {
    std::string s = R"({"version":1,"width":64,"height":48,"n_per_group":10,"groups":[)";
    for (int g = 0; g < 2; ++g) {
        s += R"({"name":"g)" + std::to_string(g) + R"(","points":[)";
        const std::size_t n = g == 0 ? first_group_size : 10;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = (g == 0 && i == 0) ? first_x : 5.0 + 3.0 * static_cast<double>(i);
            s += "[" + std::to_string(x) + "," + std::to_string(4.0 + g * 20.0 + static_cast<double>(i)) + "]";
            s += i + 1 < n ? "," : "";
        }
        s += g == 0 ? "]}," : "]}";
    }
    return s + "]}";
}

template <class E>
std::string error_of(const std::string& json) {
    try {
        parse_landmarks(json);
    } catch (const E& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Landmarks, ParsesTwoGroupsOfTen) {
    const auto set = parse_landmarks(two_group_json());
    EXPECT_EQ(set.group_count(), 2u);
    EXPECT_EQ(set.points_per_group(), 10u);
    EXPECT_EQ(set.width(), 64u);
    EXPECT_EQ(set.height(), 48u);
    EXPECT_EQ(set.group(1).name, "g1");
    EXPECT_EQ(parse_landmarks(to_json(set)), set);
}

TEST(Landmarks, WrongGroupSizeNamesTheGroup) {
    const auto msg = error_of<ValidationError>(two_group_json(10.0, 9));
    EXPECT_NE(msg.find("'g0'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("9 points"), std::string::npos) << msg;
}

TEST(Landmarks, PointAtImageWidthIsOutOfBounds) {
    const auto msg = error_of<ValidationError>(two_group_json(64.0));
    EXPECT_NE(msg.find("outside"), std::string::npos) << msg;
    EXPECT_NE(msg.find("point 0"), std::string::npos) << msg;
    EXPECT_NO_THROW(parse_landmarks(two_group_json(63.999)));
    EXPECT_FALSE(error_of<ValidationError>(two_group_json(-0.001)).empty());
}

TEST(Landmarks, ParseErrors) {
    EXPECT_THROW(parse_landmarks("{not json"), ParseError);
    EXPECT_THROW(parse_landmarks(R"({"version":2,"width":4,"height":4,"groups":[]})"), ParseError);
    EXPECT_THROW(parse_landmarks(R"({"version":1,"width":4,"height":4})"), ParseError);
    EXPECT_THROW(parse_landmarks(R"({"version":1,"width":0,"height":4,"groups":[]})"), ParseError);
    EXPECT_THROW(parse_landmarks(R"({"version":1,"width":4,"height":4,"n_per_group":1,"groups":[{"name":"a","points":[[1]]}]})"),
                 ParseError);
    EXPECT_THROW(load_landmarks("/nonexistent/landmarks.json"), ParseError);
}

TEST(Landmarks, DuplicateGroupNamesRejected) {
    std::string json = two_group_json();
    json.replace(json.find("\"g1\""), 4, "\"g0\"");
    EXPECT_FALSE(error_of<ValidationError>(json).empty());
}

TEST(Landmarks, NormalizePointExamples) {
    const auto corner = normalize_points({{-0.5, -0.5}, {3.5, 3.5}}, 4, 4);
    EXPECT_EQ(corner[0], (Point2{-1.0, -1.0}));
    EXPECT_EQ(corner[1], (Point2{1.0, 1.0}));
    EXPECT_EQ(normalize_points({{2.0, 2.0}}, 5, 5)[0], (Point2{0.0, 0.0}));
    EXPECT_THROW(normalize_points({{0.0, 0.0}}, 0, 4), ValidationError);
}

TEST(Landmarks, NormalizeDenormalizeRoundTrip) {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto w = static_cast<std::size_t>(fixtures::uniform(rng, 1, 1000));
        const auto h = static_cast<std::size_t>(fixtures::uniform(rng, 1, 1000));
        const Point2 p{fixtures::uniform(rng, -0.5, w - 0.5), fixtures::uniform(rng, -0.5, h - 0.5)};
        const Point2 back = denormalize_point(normalize_point(p, w, h), w, h);
        EXPECT_NEAR(back.x, p.x, 1e-12 * std::max(1.0, std::abs(p.x)));
        EXPECT_NEAR(back.y, p.y, 1e-12 * std::max(1.0, std::abs(p.y)));
    }
}

TEST(Landmarks, DownscaleExamples) {
    const LandmarkSet set(256, 256, 3, {{"a", {{127.5, 127.5}, {0.0, 0.0}, {255.0, 10.0}}}});
    EXPECT_EQ(downscale_landmarks(set, 1), set);
    const auto half = downscale_landmarks(set, 2);
    EXPECT_EQ(half.width(), 128u);
    EXPECT_DOUBLE_EQ(half.group(0).points[0].x, 63.5);
    EXPECT_THROW(downscale_landmarks(set, 0), ValidationError);
    EXPECT_THROW(downscale_landmarks(set, 200), ValidationError);
}

TEST(Landmarks, DownscalePreservesNormalizedCoordinates) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto set = fixtures::random_landmarks(rng, 256, 192, 3);
        const auto small = downscale_landmarks(set, 4);
        const auto a = set.normalized_points();
        const auto b = small.normalized_points();
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_NEAR(a[i].x, b[i].x, 1e-9);
            EXPECT_NEAR(a[i].y, b[i].y, 1e-9);
        }
    }
}

TEST(Landmarks, Compatibility) {
    const LandmarkSet a(10, 10, 3, {{"a", {{1, 1}, {2, 2}, {3, 1}}}});
    const LandmarkSet b(20, 20, 3, {{"a", {{5, 5}, {6, 6}, {7, 5}}}});
    const LandmarkSet c(10, 10, 3, {{"b", {{1, 1}, {2, 2}, {3, 1}}}});
    EXPECT_TRUE(a.compatible_with(b));
    EXPECT_FALSE(a.compatible_with(c));
}

// Every generated file that satisfies the schema loads; every mutation that
// breaks one invariant is rejected.
TEST(Landmarks, PropertyLoadAcceptsValidRejectsInvalid) {
    Rng rng(2024);
    const auto dir = std::filesystem::temp_directory_path() / "tpsalign_landmark_props";
    std::filesystem::create_directories(dir);
    for (int trial = 0; trial < 100; ++trial) {
        const auto w = static_cast<std::size_t>(fixtures::uniform(rng, 40, 400));
        const auto h = static_cast<std::size_t>(fixtures::uniform(rng, 40, 400));
        const auto groups = static_cast<std::size_t>(fixtures::uniform(rng, 1, 5));
        const auto n = static_cast<std::size_t>(fixtures::uniform(rng, 3, 12));
        nlohmann::json doc = nlohmann::json::parse(to_json(fixtures::random_landmarks(rng, w, h, groups, n)));
        const auto path = (dir / ("case" + std::to_string(trial) + ".json")).string();
        auto write = [&](const nlohmann::json& d) { std::ofstream(path) << d.dump(); };

        write(doc);
        ASSERT_NO_THROW(load_landmarks(path)) << doc.dump();

        const auto g = static_cast<std::size_t>(fixtures::uniform(rng, 0, static_cast<double>(groups) - 1e-9));
        const auto i = static_cast<std::size_t>(fixtures::uniform(rng, 0, static_cast<double>(n) - 1e-9));
        switch (trial % 4) {
        case 0: doc["groups"][g]["points"][i][0] = static_cast<double>(w) + fixtures::uniform(rng, 0, 5); break;
        case 1: doc["groups"][g]["points"][i][1] = -fixtures::uniform(rng, 1e-6, 5); break;
        case 2: doc["groups"][g]["points"].erase(i); break;
        case 3:
            doc["groups"].push_back(doc["groups"][g]);
            break;
        }
        write(doc);
        EXPECT_THROW(load_landmarks(path), ValidationError) << "mutation " << trial % 4;
    }
    std::filesystem::remove_all(dir);
}
