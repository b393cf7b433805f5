#include "apklab/fsdiff.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

#include "apklab/errors.hpp"
#include "apklab/hashing.hpp"
#include "apklab/textutil.hpp"

namespace apklab {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string mode_string(fs::perms p) {
    unsigned bits = static_cast<unsigned>(p) & 07777;
    char buf[8];
    std::snprintf(buf, sizeof buf, "0%o", bits);
    return buf;
}

void sort_entries(SnapshotManifest& m) {
    std::sort(m.entries.begin(), m.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
}

void check_invariants(const SnapshotManifest& m, const std::string& origin) {
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        const ManifestEntry& e = m.entries[i];
        if (i > 0 && !(m.entries[i - 1].path < e.path)) {
            throw ParseError(origin + ": entries not sorted/unique at " + e.path);
        }
        if (e.kind == "file" && e.sha256.empty()) {
            throw ParseError(origin + ": file entry without digest: " + e.path);
        }
        if (e.kind == "dir" && !e.sha256.empty()) {
            throw ParseError(origin + ": dir entry with digest: " + e.path);
        }
    }
}

}  // namespace

SnapshotManifest snapshot_tree(const fs::path& root) {
    SnapshotManifest m;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied);
    for (const auto& de : it) {
        ManifestEntry entry;
        entry.path = "/" + de.path().lexically_relative(root).generic_string();
        try {
            auto status = de.symlink_status();
            entry.mode = mode_string(status.permissions());
            if (fs::is_symlink(status)) {
                entry.kind = "symlink";
                entry.target = fs::read_symlink(de.path()).generic_string();
            } else if (fs::is_directory(status)) {
                entry.kind = "dir";
                entry.mode = mode_string(status.permissions());
            } else if (fs::is_regular_file(status)) {
                entry.kind = "file";
                std::string bytes = read_file(de.path().string());
                entry.size = bytes.size();
                entry.sha256 = sha256_hex(bytes);
            } else {
                entry.kind = "error";
                entry.mode.clear();
            }
        } catch (const std::exception&) {
            entry.kind = "error";
            entry.sha256.clear();
        }
        m.entries.push_back(std::move(entry));
    }
    sort_entries(m);
    return m;
}

std::string manifest_entry_to_line(const ManifestEntry& entry) {
    json j;
    j["path"] = entry.path;
    j["kind"] = entry.kind;
    j["mode"] = entry.mode;
    if (entry.kind == "file") {
        j["size"] = entry.size;
        j["sha256"] = entry.sha256;
    }
    if (entry.kind == "symlink") j["target"] = entry.target;
    return j.dump();
}

SnapshotManifest read_manifest(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open manifest: " + file.string());
    SnapshotManifest m;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("manifest: ") + e.what(), line_no);
        }
        ManifestEntry e;
        try {
            e.path = j.at("path").get<std::string>();
            e.kind = j.at("kind").get<std::string>();
            e.mode = j.value("mode", "");
            e.size = j.value("size", std::uint64_t{0});
            e.sha256 = j.value("sha256", "");
            e.target = j.value("target", "");
        } catch (const json::exception& e2) {
            throw ParseError(std::string("manifest: ") + e2.what(), line_no);
        }
        m.entries.push_back(std::move(e));
    }
    check_invariants(m, file.string());
    return m;
}

void write_manifest(const fs::path& file, SnapshotManifest manifest) {
    sort_entries(manifest);
    check_invariants(manifest, file.string());
    std::string out;
    for (const auto& e : manifest.entries) {
        out += manifest_entry_to_line(e);
        out.push_back('\n');
    }
    write_file(file.string(), out);
}

FsDiff diff_manifests(const SnapshotManifest& pre, const SnapshotManifest& post) {
    std::map<std::string, const ManifestEntry*> before, after;
    for (const auto& e : pre.entries) {
        if (e.kind != "error") before[e.path] = &e;
    }
    for (const auto& e : post.entries) {
        if (e.kind != "error") after[e.path] = &e;
    }

    // Content identity: digest for files, target for symlinks, kind for dirs.
    auto identity = [](const ManifestEntry& e) {
        if (e.kind == "file") return e.sha256 + ":" + std::to_string(e.size);
        if (e.kind == "symlink") return e.target;
        return e.kind;
    };
    auto shown_identity = [](const ManifestEntry& e) {
        return e.kind == "symlink" ? e.target : e.sha256;
    };

    FsDiff d;
    for (const auto& [path, e] : after) {
        if (!before.count(path)) d.created.push_back(path);
    }
    for (const auto& [path, e] : before) {
        auto it = after.find(path);
        if (it == after.end()) {
            d.deleted.push_back(path);
            continue;
        }
        const ManifestEntry& b = *e;
        const ManifestEntry& a = *it->second;
        if (b.kind != a.kind || identity(b) != identity(a)) {
            d.modified.push_back({path, shown_identity(b), shown_identity(a)});
        }
        if (b.mode != a.mode) d.mode_changed.push_back({path, b.mode, a.mode});
    }
    return d;
}

}  // namespace apklab
