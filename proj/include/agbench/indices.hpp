#pragma once

// Spectral indices from co-temporal raw-band reflectance.

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "agbench/core/csv.hpp"
#include "agbench/dataset.hpp"

namespace agbench {

struct IndexOptions {
    /// Use the conventional NIR/Green - 1 form of GCVI instead of NIR/Green.
    bool gcvi_minus_one = false;
};

using BandValues = std::map<SpectralBand, double>;

/// Raw bands an index reads, in formula order.
inline std::vector<SpectralBand> required_bands(SpectralBand kind) {
    using B = SpectralBand;
    switch (kind) {
        case B::NDVI: return {B::NIR, B::Red};
        case B::GCVI: return {B::NIR, B::Green};
        case B::NDTI: return {B::SWIR1, B::SWIR2};
        case B::STI: return {B::SWIR1, B::SWIR2};
        case B::CRC: return {B::SWIR1, B::Blue};
        default: throw std::invalid_argument(std::string(band_name(kind)) + " is not a derived index");
    }
}

namespace detail {

[[noreturn]] inline void index_domain(SpectralBand kind, const BandValues& in) {
    std::string msg = std::string(band_name(kind)) + ": zero denominator for inputs";
    for (SpectralBand b : required_bands(kind))
        msg += " " + std::string(band_name(b)) + "=" + csv::format_double(in.at(b));
    throw IndexDomainError(msg);
}

}  // namespace detail

/**
 * Evaluates one derived index:
 *   NDVI = (NIR - Red) / (NIR + Red)      GCVI = NIR / Green
 *   NDTI = (SWIR1 - SWIR2) / (SWIR1 + SWIR2)
 *   STI  = SWIR1 / SWIR2                  CRC  = (SWIR1 - Blue) / (SWIR1 + Blue)
 */
inline double compute_index(SpectralBand kind, const BandValues& inputs, const IndexOptions& opts = {}) {
    for (SpectralBand b : required_bands(kind)) {
        auto it = inputs.find(b);
        if (it == inputs.end())
            throw std::invalid_argument(std::string(band_name(kind)) + ": missing input band " +
                                        std::string(band_name(b)));
        if (!std::isfinite(it->second))
            throw std::invalid_argument(std::string(band_name(kind)) + ": non-finite " +
                                        std::string(band_name(b)));
    }
    auto v = [&](SpectralBand b) { return inputs.at(b); };
    using B = SpectralBand;
    auto normalized_difference = [&](B a, B b) {
        const double den = v(a) + v(b);
        if (den == 0.0) detail::index_domain(kind, inputs);
        return (v(a) - v(b)) / den;
    };
    auto ratio = [&](B a, B b) {
        if (v(b) == 0.0) detail::index_domain(kind, inputs);
        return v(a) / v(b);
    };
    switch (kind) {
        case B::NDVI: return normalized_difference(B::NIR, B::Red);
        case B::GCVI: return ratio(B::NIR, B::Green) - (opts.gcvi_minus_one ? 1.0 : 0.0);
        case B::NDTI: return normalized_difference(B::SWIR1, B::SWIR2);
        case B::STI: return ratio(B::SWIR1, B::SWIR2);
        case B::CRC: return normalized_difference(B::SWIR1, B::Blue);
        default: break;
    }
    throw std::invalid_argument("not a derived index");
}

/**
 * Index series on the dates present in every required raw-band series
 * (exact-date matching, no tolerance window).
 */
inline ObservationSeries derive_index_series(const BandSeriesMap& raw, SpectralBand kind,
                                             const IndexOptions& opts = {}) {
    const auto needed = required_bands(kind);
    std::vector<const ObservationSeries*> inputs;
    for (SpectralBand b : needed) {
        auto it = raw.find(b);
        if (it == raw.end() || it->second.samples.empty())
            throw NoCotemporalObservations(std::string(band_name(kind)) + " needs " +
                                           std::string(band_name(b)) + " observations");
        inputs.push_back(&it->second);
    }

    auto value_on = [](const ObservationSeries& s, Date d) -> const Sample* {
        auto it = std::lower_bound(s.samples.begin(), s.samples.end(), d,
                                   [](const Sample& smp, Date key) { return smp.date < key; });
        return it != s.samples.end() && it->date == d ? &*it : nullptr;
    };

    ObservationSeries out{inputs.front()->unit_id, kind, {}};
    for (const Sample& anchor : inputs.front()->samples) {
        BandValues values{{needed.front(), anchor.value}};
        bool everywhere = true;
        for (std::size_t k = 1; k < inputs.size() && everywhere; ++k) {
            const Sample* match = value_on(*inputs[k], anchor.date);
            if (match) values[needed[k]] = match->value;
            else everywhere = false;
        }
        if (everywhere) out.samples.push_back({anchor.date, compute_index(kind, values, opts)});
    }
    if (out.samples.empty())
        throw NoCotemporalObservations(std::string(band_name(kind)) + " for unit " + out.unit_id);
    return out;
}

/// Raw series plus the derived bands in `kinds`.
inline BandSeriesMap with_indices(const BandSeriesMap& raw, std::span<const SpectralBand> kinds,
                                  const IndexOptions& opts = {}) {
    BandSeriesMap out;
    for (const auto& [band, s] : raw)
        if (is_raw(band)) out.emplace(band, s);
    for (SpectralBand k : kinds)
        if (is_derived(k)) out.emplace(k, derive_index_series(raw, k, opts));
    return out;
}

}  // namespace agbench
