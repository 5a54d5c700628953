#pragma once

#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jugmab/domain.hpp"

namespace jugmab {

inline constexpr int kSchemaVersion = 1;

struct DatasetHeader {
    int schema_version = kSchemaVersion;
    ContextVocab vocab;
    int days = 0;
};

/// A fully loaded search log: header line plus one record per line, grouped
/// by contiguous day. day_offsets[d] .. day_offsets[d+1] delimit day d.
struct Dataset {
    DatasetHeader header;
    std::vector<SearchRecord> records;
    std::vector<std::size_t> day_offsets;

    int day_count() const { return header.days; }

    std::span<const SearchRecord> day(int day_index) const {
        return std::span<const SearchRecord>(records)
            .subspan(day_offsets[static_cast<std::size_t>(day_index)],
                     day_offsets[static_cast<std::size_t>(day_index) + 1] -
                         day_offsets[static_cast<std::size_t>(day_index)]);
    }

    /// Groups records by day and checks the simulator's preconditions:
    /// days contiguous from 0 through header.days - 1, records in day order.
    void build_day_index() {
        day_offsets.assign(1, 0);
        int current_day = 0;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const int day = records[i].day_index;
            if (day < 0 || day >= header.days)
                throw std::runtime_error("search " + records[i].search_id + ": day_index " +
                                         std::to_string(day) + " outside declared horizon");
            if (day < current_day)
                throw std::runtime_error("search " + records[i].search_id +
                                         ": records are not grouped by day");
            for (; current_day < day; ++current_day) day_offsets.push_back(i);
        }
        while (static_cast<int>(day_offsets.size()) <= header.days)
            day_offsets.push_back(records.size());
        for (int d = 0; d < header.days; ++d)
            if (day_offsets[static_cast<std::size_t>(d)] ==
                day_offsets[static_cast<std::size_t>(d) + 1])
                throw std::runtime_error("day " + std::to_string(d) +
                                         " has no records; days must be contiguous");
    }
};

namespace io {

inline nlohmann::json header_to_json(const DatasetHeader& header) {
    return {{"schema_version", header.schema_version},
            {"vocab",
             {{"brand", header.vocab.brand},
              {"device", header.vocab.device},
              {"geo", header.vocab.geo}}},
            {"days", header.days}};
}

inline DatasetHeader header_from_json(const nlohmann::json& j) {
    DatasetHeader header;
    header.schema_version = j.at("schema_version").get<int>();
    if (header.schema_version != kSchemaVersion)
        throw std::runtime_error("unsupported schema_version " +
                                 std::to_string(header.schema_version) + " (expected " +
                                 std::to_string(kSchemaVersion) + ")");
    const auto& vocab = j.at("vocab");
    header.vocab.brand = vocab.at("brand").get<std::vector<std::string>>();
    header.vocab.device = vocab.at("device").get<std::vector<std::string>>();
    header.vocab.geo = vocab.at("geo").get<std::vector<std::string>>();
    for (ContextFeature f : kContextFeatures)
        if (header.vocab.values(f).empty())
            throw std::runtime_error(std::string("empty vocabulary for feature ") +
                                     feature_name(f));
    header.days = j.at("days").get<int>();
    if (header.days < 1) throw std::runtime_error("header days must be >= 1");
    return header;
}

inline nlohmann::json record_to_json(const SearchRecord& record) {
    nlohmann::json items = nlohmann::json::array();
    for (const Item& item : record.items) {
        nlohmann::json j = {{"item_id", item.item_id},
                            {"utility_score", item.utility_score},
                            {"compensation_score", item.compensation_score},
                            {"relevance_label", item.relevance_label}};
        if (!item.attributes.empty()) j["attributes"] = item.attributes;
        items.push_back(std::move(j));
    }
    return {{"search_id", record.search_id},
            {"day_index", record.day_index},
            {"context",
             {{"brand", record.context.brand},
              {"device", record.context.device},
              {"geo", record.context.geo}}},
            {"juggler",
             {{"w_utility", record.juggler.w_utility}, {"w_comp", record.juggler.w_comp}}},
            {"items", std::move(items)}};
}

inline SearchRecord record_from_json(const nlohmann::json& j) {
    SearchRecord record;
    record.search_id = j.at("search_id").get<std::string>();
    record.day_index = j.at("day_index").get<int>();
    const auto& context = j.at("context");
    record.context.brand = context.at("brand").get<std::string>();
    record.context.device = context.at("device").get<std::string>();
    record.context.geo = context.at("geo").get<std::string>();
    const auto& juggler = j.at("juggler");
    record.juggler.w_utility = juggler.at("w_utility").get<double>();
    record.juggler.w_comp = juggler.at("w_comp").get<double>();
    for (const auto& item_json : j.at("items")) {
        Item item;
        item.item_id = item_json.at("item_id").get<std::string>();
        item.utility_score = item_json.at("utility_score").get<double>();
        item.compensation_score = item_json.at("compensation_score").get<double>();
        item.relevance_label = item_json.at("relevance_label").get<int>();
        if (item_json.contains("attributes"))
            item.attributes = item_json.at("attributes").get<std::map<std::string, double>>();
        record.items.push_back(std::move(item));
    }
    return record;
}

}  // namespace io

inline Dataset read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    Dataset dataset;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_number) + ": " + e.what());
        }
        try {
            if (line_number == 1)
                dataset.header = io::header_from_json(j);
            else
                dataset.records.push_back(io::record_from_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_number) + ": " + e.what());
        }
    }
    if (line_number == 0) throw std::runtime_error("dataset file is empty: " + path);
    dataset.build_day_index();
    return dataset;
}

inline void write_dataset(const std::string& path, const Dataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    out << io::header_to_json(dataset.header).dump() << '\n';
    for (const SearchRecord& record : dataset.records)
        out << io::record_to_json(record).dump() << '\n';
    if (!out) throw std::runtime_error("failed while writing dataset file: " + path);
}

/// Runs full record validation over the whole dataset. Throws on the first
/// invalid record (identified by search_id); returns the accumulated
/// non-fatal warnings.
inline std::vector<std::string> validate_dataset(const Dataset& dataset,
                                                 const ArmSpace& arm_space) {
    std::vector<std::string> warnings;
    for (const SearchRecord& record : dataset.records) {
        auto record_warnings = validate_record(record, arm_space, dataset.header.vocab);
        warnings.insert(warnings.end(), record_warnings.begin(), record_warnings.end());
    }
    return warnings;
}

}  // namespace jugmab
