// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "blossom/annotation_io.hpp"

using namespace blossom;

TEST(ParseLabelLine, GroundTruthFieldsMapDirectly) {
    const auto det = parse_label_line("0 0.5 0.5 0.1 0.2", LabelMode::ground_truth);
    EXPECT_EQ(det.category, 0u);
    EXPECT_EQ(det.box, (BoundingBox{0.5, 0.5, 0.1, 0.2}));
    EXPECT_FALSE(det.confidence.has_value());
}

TEST(ParseLabelLine, PredictionCarriesConfidence) {
    const auto det = parse_label_line("1 0.25 0.75 0.05 0.05 0.90", LabelMode::prediction);
    EXPECT_EQ(det.category, 1u);
    EXPECT_EQ(det.box, (BoundingBox{0.25, 0.75, 0.05, 0.05}));
    ASSERT_TRUE(det.confidence.has_value());
    EXPECT_DOUBLE_EQ(*det.confidence, 0.90);
}

TEST(ParseLabelLine, FieldCountIsEnforcedPerMode) {
    const auto expect_code = [](std::string_view line, LabelMode mode, ErrorCode code) {
        try {
            parse_label_line(line, mode);
            ADD_FAILURE() << "accepted: " << line;
        } catch (const ParseError& e) {
            EXPECT_EQ(e.code(), code) << line;
            EXPECT_EQ(e.line(), line);
        }
    };
    expect_code("0 0.5 0.5 0.1", LabelMode::ground_truth, ErrorCode::malformed_line);
    // Confidence is forbidden on ground truth and required on predictions.
    expect_code("0 0.5 0.5 0.1 0.2 0.9", LabelMode::ground_truth, ErrorCode::malformed_line);
    expect_code("0 0.5 0.5 0.1 0.2", LabelMode::prediction, ErrorCode::malformed_line);
    expect_code("0 0.5 abc 0.1 0.2", LabelMode::ground_truth, ErrorCode::malformed_line);
    expect_code("0.5 0.5 0.5 0.1 0.2", LabelMode::ground_truth, ErrorCode::malformed_line);
    expect_code("0 0.5 0.5 0.1 0.2x", LabelMode::ground_truth, ErrorCode::malformed_line);
}

TEST(ParseLabelLine, RangeViolationsReportTheColumn) {
    try {
        parse_label_line("0 0.5 1.5 0.1 0.2", LabelMode::ground_truth);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.code(), ErrorCode::out_of_range);
        EXPECT_EQ(e.column(), 7u);
    }
    EXPECT_THROW(parse_label_line("0 0.5 0.5 0 0.2", LabelMode::ground_truth), ParseError);
    EXPECT_THROW(parse_label_line("0 0.5 0.5 0.1 1.01", LabelMode::ground_truth), ParseError);
    EXPECT_THROW(parse_label_line("0 0.5 0.5 0.1 0.2 1.2", LabelMode::prediction), ParseError);
    EXPECT_THROW(parse_label_line("-1 0.5 0.5 0.1 0.2", LabelMode::ground_truth), ParseError);
    EXPECT_THROW(parse_label_line("0 nan 0.5 0.1 0.2", LabelMode::ground_truth), ParseError);
}

TEST(ParseLabelLine, EdgeBoxesAreValid) {
    // The center sits on the frame border; the box hangs off it.
    const auto det = parse_label_line("0 0.0 1.0 0.2 0.2", LabelMode::ground_truth);
    EXPECT_EQ(det.box, (BoundingBox{0.0, 1.0, 0.2, 0.2}));
    EXPECT_NO_THROW(parse_label_line("1 1 0 1 1", LabelMode::ground_truth));
}

TEST(ParseLabelFile, KeepsLineOrderAndSkipsBlankLines) {
    const auto frame = parse_label_file("0 0.1 0.1 0.1 0.1\n\n  \n1 0.9 0.9 0.1 0.1\n", "f", LabelMode::ground_truth);
    EXPECT_EQ(frame.frame_id, "f");
    ASSERT_EQ(frame.detections.size(), 2u);
    EXPECT_EQ(frame.detections[0].category, 0u);
    EXPECT_EQ(frame.detections[1].category, 1u);
}

TEST(ParseLabelFile, EmptyContentIsAnEmptyFrame) {
    EXPECT_TRUE(parse_label_file("", "empty", LabelMode::ground_truth).detections.empty());
    EXPECT_TRUE(parse_label_file("\n\n", "empty", LabelMode::prediction).detections.empty());
}

TEST(ParseLabelFile, ErrorsCiteTheOneBasedLine) {
    try {
        parse_label_file("0 0.5 0.5 0.1 0.2\n0 0.5 0.5 0.1\n", "f", LabelMode::ground_truth);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line_number(), 2u);
        EXPECT_EQ(e.code(), ErrorCode::malformed_line);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(ParseLabelFile, AcceptsCrlfAndTabs) {
    const auto frame = parse_label_file("0\t0.5\t0.5\t0.1\t0.2\r\n1 0.2 0.2 0.1 0.1\r\n", "f", LabelMode::ground_truth);
    ASSERT_EQ(frame.detections.size(), 2u);
    EXPECT_DOUBLE_EQ(frame.detections[0].box.h, 0.2);
}

TEST(SerializeLabelFile, CanonicalForm) {
    FrameAnnotations frame{"f", {Detection{0, {0.5, 0.5, 0.1, 0.2}, std::nullopt}}, std::nullopt};
    EXPECT_EQ(serialize_label_file(frame, LabelMode::ground_truth), "0 0.500000 0.500000 0.100000 0.200000\n");
    EXPECT_EQ(serialize_label_file(FrameAnnotations{"e", {}, std::nullopt}, LabelMode::ground_truth), "");

    frame.detections[0].confidence = 0.9;
    EXPECT_EQ(serialize_label_file(frame, LabelMode::prediction), "0 0.500000 0.500000 0.100000 0.200000 0.900000\n");
}

TEST(SerializeLabelFile, PredictionModeNeedsConfidence) {
    FrameAnnotations frame{"f", {Detection{0, {0.5, 0.5, 0.1, 0.2}, std::nullopt}}, std::nullopt};
    EXPECT_THROW(serialize_label_file(frame, LabelMode::prediction), Error);
}

TEST(SerializeLabelFile, TwoLineRoundTrip) {
    const std::string text = "0 0.5 0.5 0.1 0.2\n1 0.25 0.75 0.05 0.05\n";
    const auto first = parse_label_file(text, "f", LabelMode::ground_truth);
    const auto second = parse_label_file(serialize_label_file(first, LabelMode::ground_truth), "f", LabelMode::ground_truth);
    EXPECT_EQ(first.detections, second.detections);
}

// Random frames quantized to six digits survive parse(serialize(.)) exactly,
// and serialization is byte-stable.
TEST(SerializeLabelFile, RoundTripProperty) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto q = [](double v) { return std::round(v * 1e6) / 1e6; };
    for (int trial = 0; trial < 300; ++trial) {
        const auto mode = trial % 2 ? LabelMode::prediction : LabelMode::ground_truth;
        FrameAnnotations frame{"f", {}, std::nullopt};
        const int n = static_cast<int>(rng() % 15);
        for (int i = 0; i < n; ++i) {
            Detection d;
            d.category = static_cast<CategoryIndex>(rng() % 3);
            d.box = {q(unit(rng)), q(unit(rng)), std::max(1e-6, q(unit(rng))), std::max(1e-6, q(unit(rng)))};
            if (mode == LabelMode::prediction) d.confidence = q(unit(rng));
            frame.detections.push_back(d);
        }
        const auto text = serialize_label_file(frame, mode);
        const auto back = parse_label_file(text, "f", mode);
        ASSERT_EQ(back.detections, frame.detections);
        ASSERT_EQ(serialize_label_file(back, mode), text);
    }
}

TEST(DetectMode, FromFirstNonBlankLine) {
    EXPECT_EQ(detect_mode("\n0 0.5 0.5 0.1 0.2\n"), LabelMode::ground_truth);
    EXPECT_EQ(detect_mode("0 0.5 0.5 0.1 0.2 0.3\n"), LabelMode::prediction);
    EXPECT_EQ(detect_mode(""), std::nullopt);
    EXPECT_EQ(detect_mode("0 1 2"), std::nullopt);
}

TEST(Taxonomy, DefaultsAndNamesFile) {
    const Taxonomy defaults;
    EXPECT_EQ(defaults.name(0), "unopened");
    EXPECT_EQ(defaults.name(1), "opened");
    EXPECT_EQ(defaults.name(7), "class_7");
    EXPECT_EQ(defaults.find("opened"), 1u);
    EXPECT_EQ(defaults.find("0"), 0u);
    EXPECT_EQ(defaults.find("petal"), std::nullopt);

    const auto custom = Taxonomy::parse("bud\nbloom\nking\n\n");
    EXPECT_EQ(custom.size(), 3u);
    EXPECT_EQ(custom.name(2), "king");
    EXPECT_THROW(Taxonomy::parse("bud\n\nbloom\n"), ParseError);
}

TEST(LoadLabelDir, FrameIdsComeFromStemsInNameOrder) {
    const auto dir = std::filesystem::path(BLOSSOM_FIXTURE_DIR) / "roundtrip" / "gt";
    const auto frames = load_label_dir(dir, LabelMode::ground_truth);
    ASSERT_EQ(frames.size(), 30u);
    EXPECT_EQ(frames.front().frame_id, "gt_00");
    EXPECT_EQ(frames.back().frame_id, "gt_29");
    EXPECT_TRUE(frames[3].detections.empty());
    ASSERT_TRUE(frames[0].source_path.has_value());
}

TEST(LoadLabelDir, ErrorsNameTheFile) {
    const auto dir = std::filesystem::temp_directory_path() / "blossom_bad_labels";
    std::filesystem::remove_all(dir);
    write_text_file(dir / "a.txt", "0 0.5 0.5 0.1 0.2\n0 0.5 0.5\n");
    try {
        load_label_dir(dir, LabelMode::ground_truth);
        FAIL();
    } catch (const Error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("a.txt"), std::string::npos);
        EXPECT_NE(msg.find("line 2"), std::string::npos);
    }
    std::filesystem::remove_all(dir);
    EXPECT_THROW(load_label_dir(dir), Error);
}
