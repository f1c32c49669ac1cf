"""Repositories package"""
