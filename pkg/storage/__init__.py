"""
Storage and export module
CSV tables, JSON summaries, Excel reports and periodic field dumps
"""
