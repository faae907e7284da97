"""Tests for eqkit"""
