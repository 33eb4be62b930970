"""
auto-noise 测试模块
"""
