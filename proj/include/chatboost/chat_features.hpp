#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chatboost/design_matrix.hpp"

namespace chatboost {

/// Reserved user id for cold-start rows; never a real id.
inline constexpr const char* kUnknownUser = "__unknown__";
/// Marker for erased numeric user-scope features on cold-start rows.
inline constexpr double kErasedNumeric = -1.0;

/// One timestamped comment event. Timestamps are in days; they are quantized
/// to whole days before any time feature is computed.
struct ChatEvent {
    std::string user_id;
    std::string channel_id;
    std::string game_id;
    double timestamp = 0.0;
    int64_t message_chars = 0;
};

/// The aggregate features computed over one key's events (a user, a channel,
/// or a channel-user pair).
struct FeatureBlock {
    double t_min = 0.0;       // day of first message
    double t_max = 0.0;       // day of last message
    double t_days = 0.0;      // distinct days with messages
    double t_dur = 0.0;       // t_max - t_min
    double t_active = 0.0;    // t_days / t_dur, clamped to (0, 1]; 1 when t_dur = 0
    double m_total = 0.0;     // total characters
    double m_max = 0.0;       // max characters per message
    double m_med = 0.0;       // median characters per message (interpolated)
    double g_n_mes = 0.0;     // message count
    double g_n = 0.0;         // distinct games
    double g_chat = 0.0;      // messages under the configured "just chatting" id
    double g_top_freq = 0.0;  // share of messages under g_top
    std::string g_top;        // game with most messages, ties to smallest id
};

/// One aggregated channel-user row: the three per-scope blocks plus the
/// id/activity features and the label.
struct PairRecord {
    std::string uid;
    std::string cid;
    FeatureBlock pair;
    FeatureBlock user;
    FeatureBlock channel;
    double n_channel = 0.0;  // distinct channels per user
    double n_user = 0.0;     // distinct users per channel
    std::string u_group;     // low / normal / high
    std::string c_group;
    int subscribed = 0;
    bool labeled = false;
    /// Activity cell used for stratified sampling and per-group evaluation;
    /// survives cold-start erasure of the feature columns.
    std::string eval_group;
};

struct ActivityThresholds {
    int64_t user_low_max = 5;
    int64_t user_normal_max = 50;
    int64_t channel_low_max = 150;
    int64_t channel_normal_max = 2500;

    void validate() const;  // throws ParamError
};

struct FeatureConfig {
    std::string just_chatting_id = "just_chatting";
    ActivityThresholds thresholds;
};

enum class Scope { User, Channel, Pair };

/// Computes the aggregate block over one key's events.
FeatureBlock aggregate_scope(const std::vector<const ChatEvent*>& events,
                             const std::string& just_chatting_id);

/// low when count <= low_max, normal when count <= normal_max, else high.
std::string label_activity(int64_t count, int64_t low_max, int64_t normal_max);

/// Group label string for a user/channel level pair, e.g. "u_low-c_high".
std::string group_cell(const std::string& u_level, const std::string& c_level);

/// Aggregates an event log into one record per distinct (uid, cid). When
/// `labels` is given, every pair must appear in it.
std::vector<PairRecord> build_pair_records(
    const std::vector<ChatEvent>& events, const FeatureConfig& config,
    const std::map<std::pair<std::string, std::string>, int>* labels);

/// Rewrites a record as its cold-start twin: uid becomes the unknown
/// sentinel and every user-scope feature is erased; channel- and pair-scope
/// features are kept.
PairRecord cold_start_copy(const PairRecord& record);

// -- event-log and record I/O ------------------------------------------------

std::vector<ChatEvent> read_events_jsonl(const std::string& path);
std::vector<ChatEvent> read_events_csv(const std::string& path);
/// Dispatches on the .jsonl / .csv suffix.
std::vector<ChatEvent> read_events(const std::string& path);
void write_events_jsonl(const std::vector<ChatEvent>& events, const std::string& path);

std::map<std::pair<std::string, std::string>, int> read_labels_csv(const std::string& path);

/// The 6 id/activity feature names plus the 13 aggregates per scope
/// (pair-scope plain, user-scope "_u", channel-scope "_c").
const std::vector<std::string>& all_feature_names();
/// The reduced high-importance feature subset.
const std::vector<std::string>& top_feature_names();
ColumnKind feature_kind(const std::string& name);

double numeric_feature(const PairRecord& record, const std::string& name);
const std::string& categorical_feature(const PairRecord& record, const std::string& name);

/// Writes records as CSV restricted to `features`, plus the label column
/// (when labeled) and the evaluation `group` column.
void write_records_csv(const std::vector<PairRecord>& records,
                       const std::vector<std::string>& features,
                       const std::string& path);

/// Strict inverse of write_records_csv over the full feature set.
std::vector<PairRecord> read_records_csv(const std::string& path);

/// Builds a DesignMatrix over the named features, with the label as target.
DesignMatrix records_to_matrix(const std::vector<PairRecord>& records,
                               const std::vector<std::string>& features);

}  // namespace chatboost
