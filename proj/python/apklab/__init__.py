"""Sandboxed mobile-app behavior analysis.

Thin re-export of the compiled core. The heavy lifting (device simulation,
capture parsing, filtering, report generation) lives in the C++ extension.
"""

from _apklab import (
    AnalysisError,
    analyze,
    apk_urls,
    check_sim_script,
    default_config,
    filter_record,
    manifest_summary,
    md5_hex,
    pcap_summary,
    sha1_hex,
    sha256_hex,
    store_records,
)

__all__ = [
    "AnalysisError",
    "analyze",
    "apk_urls",
    "check_sim_script",
    "default_config",
    "filter_record",
    "manifest_summary",
    "md5_hex",
    "pcap_summary",
    "sha1_hex",
    "sha256_hex",
    "store_records",
]
