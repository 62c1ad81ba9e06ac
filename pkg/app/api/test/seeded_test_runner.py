from django.conf import settings
from django.contrib.auth import get_user_model
from django.test.runner import DiscoverRunner

TEST_SEED = 20240901


class SeededTestRunner(DiscoverRunner):
    """
    Pins the default experiment seed so every suite is reproducible, and
    creates the admin account the API tests log in with.
    """

    def setup_test_environment(self, **kwargs):
        super().setup_test_environment(**kwargs)
        settings.PRIVCACHE_DEFAULT_SEED = TEST_SEED

    def setup_databases(self, **kwargs):
        # Call the super method to create the test databases first
        result = super().setup_databases(**kwargs)

        User = get_user_model()
        if not User.objects.filter(username='admin').exists():
            self.superuser = User.objects.create_superuser(
                username='admin',
                email='admin@example.com',
                password='password123'
            )
        else:
            self.superuser = User.objects.get(username='admin')
        return result

    def teardown_databases(self, old_config, **kwargs):
        return super().teardown_databases(old_config, **kwargs)
