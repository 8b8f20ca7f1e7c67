#include "wsmn/image.hpp"
#include "wsmn/marks.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace wsmn;

TEST(Marks, SequenceIsBalancedAndSeeded) {
    for (auto [r, c] : {std::pair{64, 64}, {16, 16}, {7, 9}}) {
        auto a = gen_binary_sequence(42, r, c);
        int ones = cv::countNonZero(a);
        EXPECT_EQ(ones, (r * c) / 2) << r << "x" << c;
        EXPECT_EQ(cv::norm(a, gen_binary_sequence(42, r, c), cv::NORM_INF), 0);
    }
    EXPECT_GT(cv::norm(gen_binary_sequence(1, 32, 32), gen_binary_sequence(2, 32, 32), cv::NORM_L1), 0);
}

TEST(Marks, XorIsAnInvolution) {
    auto m = gen_binary_sequence(5, 32, 32), chi = gen_binary_sequence(6, 32, 32);
    auto enc = xor_mask(m, chi);
    EXPECT_EQ(cv::norm(xor_mask(enc, chi), m, cv::NORM_INF), 0);
    EXPECT_EQ(cv::countNonZero(xor_mask(m, m)), 0);
}

TEST(Marks, ChaoticPermutationIsBijective) {
    for (int n : {1, 2, 100, 1024}) {
        auto p = ccs_permutation(0xabcdef, n);
        std::vector<int> sorted = p;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> expected(n);
        std::iota(expected.begin(), expected.end(), 0);
        EXPECT_EQ(sorted, expected);
    }
    auto m = gen_binary_sequence(9, 32, 32);
    auto s = ccs_shuffle(m, 77);
    EXPECT_EQ(cv::norm(ccs_unshuffle(s, 77), m, cv::NORM_INF), 0);
    EXPECT_EQ(cv::countNonZero(s), cv::countNonZero(m));
    EXPECT_GT(cv::norm(s, m, cv::NORM_L1), 0);
    EXPECT_NE(ccs_permutation(1, 64), ccs_permutation(2, 64));
}

TEST(Marks, KeyParsing) {
    EXPECT_EQ(KeySet::parse_key("0x10"), 16u);
    EXPECT_EQ(KeySet::parse_key("123"), 123u);
    EXPECT_THROW(KeySet::parse_key("12z"), InputError);
    EXPECT_THROW(KeySet::parse_key(""), InputError);
    KeySet a, b;
    b.key2 = 99;
    EXPECT_NE(a.fingerprint(), b.fingerprint());
}

TEST(Marks, FourCopyTiling) {
    cv::Mat1b s = (cv::Mat1b(2, 3) << 1, 0, 0, 0, 1, 1);
    cv::Mat1b t = tile_four(s);
    ASSERT_EQ(t.size(), cv::Size(6, 4));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j)
            for (auto p : tile_positions(i, j, 2, 3)) EXPECT_EQ(t(p), s(i, j));
}

TEST(Marks, PreparedShapes) {
    KeySet keys;
    auto logo = default_logo(32, 32);
    MarkSet ms = prepare_marks(logo, keys, 512, 512, 8);
    EXPECT_EQ(ms.logo.size(), cv::Size(32, 32));
    EXPECT_EQ(ms.wc.size(), cv::Size(64, 64));
    EXPECT_EQ(ms.wa.size(), cv::Size(64, 64));
    EXPECT_EQ(cv::norm(ms.wa, auth_mark(keys, 512, 512, 8), cv::NORM_INF), 0);
    // decode path: untile one copy, unshuffle, decrypt
    cv::Mat1b copy = ms.wc(cv::Rect(32, 32, 32, 32)).clone();
    EXPECT_EQ(cv::norm(xor_mask(ccs_unshuffle(copy, keys.key2), ms.chi), ms.logo, cv::NORM_INF), 0);
    EXPECT_THROW(prepare_marks(default_logo(16, 32), keys, 512, 512, 8), InputError);
}

TEST(Marks, NonSquareImages) {
    MarkSet ms = prepare_marks(default_logo(16, 32), KeySet{}, 512, 256, 8);
    EXPECT_EQ(ms.wc.size(), cv::Size(64, 32));
}
