"""Electron/qubit coupling and phase-estimation protocols."""
