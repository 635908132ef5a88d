# ===============================
# NOTIFICATION FUNCTIONS
# ===============================
"""
Handles desktop notifications
"""
try:
    from plyer import notification
    NOTIFIER_ENABLED = True
except ImportError:
    print("Warning: 'plyer' library not found. Desktop notifications are disabled.")
    NOTIFIER_ENABLED = False


def send_notification(title, message):
    """Send desktop notification; returns True when one was shown."""
    if not NOTIFIER_ENABLED:
        return False
    try:
        notification.notify(
            title=title,
            message=message,
            app_name='Common2 Queue Verifier',
            timeout=10
        )
        return True
    except Exception as e:
        print(f"Failed to send notification: {e}")
        return False


def notify_suite_result(name, passed, violations):
    if passed:
        return send_notification("Verification passed", f"{name}: no violations")
    return send_notification("Verification FAILED", f"{name}: {violations} violation(s)")
