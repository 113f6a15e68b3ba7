#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "agbench/dataset.hpp"
#include "agbench/synth.hpp"
#include "test_util.hpp"

using namespace agbench;
namespace fs = std::filesystem;

namespace {

std::string embedding_row(const std::string& unit, int year, std::size_t n = kEmbeddingDim) {
    std::string row = unit + "," + std::to_string(year);
    for (std::size_t i = 0; i < n; ++i) row += "," + std::to_string(0.01 * static_cast<double>(i));
    return row + "\n";
}

std::string embedding_header() {
    std::string h = "unit_id,year";
    for (std::size_t i = 0; i < kEmbeddingDim; ++i) h += "," + embedding_name(i);
    return h + "\n";
}

/// A small valid bundle; individual files can be replaced afterwards.
fs::path small_bundle(const std::string& name) {
    const auto dir = testutil::fresh_dir(name);
    testutil::write_file(dir / "units.csv",
                         "unit_id,level,state,county_id,ecoregion,elevation_m\n"
                         "c1,county,IL,c1,East,200\n"
                         "c2,county,IA,c2,,310.5\n"
                         "f1,field,IL,c1,auto,201\n"
                         "x1,county,TX,x1,override:West,50\n");
    testutil::write_file(dir / "observations.csv",
                         "unit_id,band,date,value\n"
                         "c1,NIR,2020-05-02,0.4\n"
                         "c1,NIR,2020-05-01,0.3\n"
                         "c1,Red,2020-05-01,0.1\n");
    testutil::write_file(dir / "climate.csv",
                         "unit_id,date,tmin_c,tmax_c,ppt_mm\n"
                         "c1,2020-05-01,10,20,0\n"
                         "c1,2020-05-02,11,22,3.5\n");
    testutil::write_file(dir / "embeddings.csv", embedding_header() + embedding_row("c1", 2020));
    testutil::write_file(dir / "labels.csv",
                         "unit_id,year,task,value\n"
                         "c1,2020,yield,180.5\n"
                         "f1,2020,tillage_class,1\n");
    return dir;
}

std::string load_error(const fs::path& dir) {
    try {
        (void)load_dataset(dir);
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(MaskedMean, Examples) {
    const std::vector<double> v{1, 2, 3};
    EXPECT_EQ(masked_mean(v, std::vector<std::uint8_t>{1, 0, 1}), 2.0);
    EXPECT_EQ(masked_mean(std::vector<double>{5}, std::vector<std::uint8_t>{1}), 5.0);
    try {
        masked_mean(v, std::vector<std::uint8_t>{0, 0, 0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "no valid pixels");
    }
}

TEST(MaskedMean, AllOnesIsPlainMean) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> v(1 + t % 37);
        for (double& x : v) x = u(gen);
        double s = 0;
        for (double x : v) s += x;
        EXPECT_DOUBLE_EQ(masked_mean(v, std::vector<std::uint8_t>(v.size(), 1)), s / static_cast<double>(v.size()));
    }
}

TEST(Bands, NamesResolveUniquely) {
    for (SpectralBand b : kAllBands) {
        ASSERT_EQ(parse_band(band_name(b)), b);
        EXPECT_NE(is_raw(b), is_derived(b));
    }
    EXPECT_EQ(std::count_if(kAllBands.begin(), kAllBands.end(), [](SpectralBand b) { return is_raw(b); }), 6);
    EXPECT_FALSE(parse_band("nir").has_value());
}

TEST(Ecoregion, DefaultMapFollowsStateLists) {
    for (const char* s : {"IL", "IN", "MI", "OH", "WI"}) EXPECT_EQ(default_ecoregion(s), Ecoregion::East) << s;
    for (const char* s : {"IA", "KS", "MN", "MO", "ND", "NE", "SD"}) EXPECT_EQ(default_ecoregion(s), Ecoregion::West) << s;
    EXPECT_EQ(default_ecoregion("TX"), Ecoregion::Other);
}

TEST(LoadDataset, ReadsValidBundle) {
    const auto ds = load_dataset(small_bundle("valid"));
    EXPECT_EQ(ds.units().size(), 4u);
    EXPECT_EQ(ds.manifest().rows("observations.csv"), 3u);
    EXPECT_EQ(ds.manifest().rows("labels.csv"), 2u);
    const auto& nir = ds.series("c1").at(SpectralBand::NIR);
    ASSERT_EQ(nir.samples.size(), 2u);
    EXPECT_LT(nir.samples[0].date, nir.samples[1].date);
    EXPECT_EQ(ds.find_unit("c2")->ecoregion, Ecoregion::West);
    EXPECT_EQ(ds.find_unit("f1")->county_id, "c1");
    EXPECT_EQ(ds.find_unit("x1")->ecoregion, Ecoregion::West);
    EXPECT_TRUE(ds.find_unit("x1")->ecoregion_overridden);
    EXPECT_EQ(ds.climate("c1").size(), 2u);
    ASSERT_NE(ds.embedding("c1", 2020), nullptr);
    EXPECT_EQ(ds.embedding("c1", 2021), nullptr);
}

TEST(LoadDataset, EmptyLabelsAreFine) {
    const auto dir = small_bundle("nolabels");
    testutil::write_file(dir / "labels.csv", "unit_id,year,task,value\n");
    EXPECT_TRUE(load_dataset(dir).labels().empty());
}

TEST(LoadDataset, ShortEmbeddingRowNamesFileAndLine) {
    const auto dir = small_bundle("shortemb");
    testutil::write_file(dir / "embeddings.csv",
                         embedding_header() + embedding_row("c1", 2020) + embedding_row("c1", 2021, 63));
    EXPECT_NE(load_error(dir).find("embeddings.csv:3"), std::string::npos) << load_error(dir);
}

TEST(LoadDataset, MissingFileIsReported) {
    const auto dir = small_bundle("missing");
    fs::remove(dir / "climate.csv");
    EXPECT_NE(load_error(dir).find("climate.csv"), std::string::npos);
}

TEST(LoadDataset, InvariantViolationsNameFileAndLine) {
    struct Case {
        const char* file;
        std::string body;
        const char* where;
    };
    const std::vector<Case> cases{
        {"climate.csv", "unit_id,date,tmin_c,tmax_c,ppt_mm\nc1,2020-05-01,25,20,0\n", "climate.csv:2"},
        {"climate.csv", "unit_id,date,tmin_c,tmax_c,ppt_mm\nc1,2020-05-01,1,2,0\nc1,2020-05-01,1,2,0\n",
         "climate.csv:3"},
        {"climate.csv", "unit_id,date,tmin_c,tmax_c,ppt_mm\nc1,2020-05-01,1,nan,0\n", "climate.csv:2:4"},
        {"observations.csv", "unit_id,band,date,value\nc1,NIR,2020-05-01,0.3\nc1,NIR,2020-05-01,0.4\n",
         "observations.csv:3"},
        {"observations.csv", "unit_id,band,date,value\nc1,NIR,2020-05-01,1.7\n", "observations.csv:2:4"},
        {"observations.csv", "unit_id,band,date,value\nc1,EVI,2020-05-01,0.3\n", "observations.csv:2:2"},
        {"observations.csv", "unit_id,band,date,value\nc1,NIR,2020-5-01,0.3\n", "observations.csv:2:3"},
        {"labels.csv", "unit_id,year,task,value\nzz,2020,yield,1\n", "labels.csv:2"},
        {"labels.csv", "unit_id,year,task,value\nc1,2020,tillage_ratio,1.2\n", "labels.csv:2"},
        {"labels.csv", "unit_id,year,task,value\nc1,2020,covercrop_class,0.5\n", "labels.csv:2"},
        {"units.csv", "unit_id,level,state,county_id,ecoregion,elevation_m\nc1,county,IL,c1,West,1\n", "units.csv:2:5"},
        {"units.csv", "unit_id,level,state,county_id,ecoregion,elevation_m\nc1,county,IL,c1,,inf\n", "units.csv:2:6"},
        {"units.csv",
         "unit_id,level,state,county_id,ecoregion,elevation_m\nc1,county,IL,c1,,1\nc1,county,IL,c1,,1\n",
         "units.csv:3"},
        {"units.csv", "unit_id,level,state,county_id,ecoregion,elevation_m\nc1,farm,IL,c1,,1\n", "units.csv:2:2"},
    };
    for (const auto& c : cases) {
        const auto dir = small_bundle("invariant");
        testutil::write_file(dir / c.file, c.body);
        const std::string err = load_error(dir);
        EXPECT_NE(err.find(c.where), std::string::npos) << c.body << " -> " << err;
    }
}

TEST(LoadDataset, WrongHeaderRejected) {
    const auto dir = small_bundle("header");
    testutil::write_file(dir / "labels.csv", "unit,year,task,value\n");
    EXPECT_NE(load_error(dir).find("labels.csv:1"), std::string::npos);
}

TEST(LoadDataset, CanonicalFormDeterministic) {
    const auto dir = small_bundle("canonical");
    EXPECT_EQ(canonical_form(load_dataset(dir)), canonical_form(load_dataset(dir)));
}

TEST(LoadDataset, SynthBundleRoundTripsRowCounts) {
    SynthSpec spec;
    spec.n_counties = 6;
    spec.fields_per_county = 2;
    spec.gap_rate = 0.2;
    const auto dir = testutil::fresh_dir("roundtrip");
    const auto bundle = generate(spec, 99, dir);
    const auto ds = load_dataset(dir);
    EXPECT_EQ(ds.manifest().rows("units.csv"), bundle.units.size());
    EXPECT_EQ(ds.manifest().rows("observations.csv"), bundle.observation_rows());
    EXPECT_EQ(ds.manifest().rows("climate.csv"), bundle.climate.size());
    EXPECT_EQ(ds.manifest().rows("embeddings.csv"), bundle.embeddings.size());
    EXPECT_EQ(ds.manifest().rows("labels.csv"), bundle.labels.size());
    EXPECT_EQ(canonical_form(ds), canonical_form(bundle.dataset()));
}

TEST(Dataset, FromPartsRejectsDuplicates) {
    UnitMeta u{"u", UnitLevel::county, "IL", "u", Ecoregion::East, false, 1.0};
    EXPECT_THROW(Dataset::from_parts({u, u}, {}, {}, {}, {}), Error);
    EmbeddingVector e{"u", 2020, {}};
    EXPECT_THROW(Dataset::from_parts({u}, {}, {}, {e, e}, {}), Error);
    LabelRecord l{"nobody", 2020, Task::yield, 1.0};
    EXPECT_THROW(Dataset::from_parts({u}, {}, {}, {}, {l}), Error);
}
